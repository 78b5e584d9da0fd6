// Left panel: search box plus the dataset / case / run hierarchy.

import { BrowserViewModel } from '../viewmodels/browser';
import { SessionViewModel } from '../viewmodels/session';
import { append, clear, el } from './dom';

export function mountBrowser(
	root: HTMLElement,
	browser: BrowserViewModel,
	session: SessionViewModel
): void {
	const container = el('nav', { class: 'browser', 'aria-label': 'Dataset browser' });
	root.append(container);

	const render = () => {
		clear(container);
		const { datasets, runOutputs, noMatches } = browser.searchResults();
		const error = browser.error.get();

		const searchInput = el('input', {
			type: 'search',
			placeholder: 'Search datasets, cases, outputs…',
			'aria-label': 'Search',
			value: browser.search.get(),
			oninput: (event) => browser.search.set((event.target as HTMLInputElement).value)
		});

		const tree = el('div', { class: 'tree' });
		for (const { dataset, cases } of datasets) {
			const open = browser.isDatasetOpen(dataset.name);
			const caseList = el('ul', {});
			if (open) {
				for (const case_ of cases) {
					const selected = browser.isCaseSelected(case_.path);
					caseList.append(
						el(
							'li',
							{},
							el(
								'button',
								{
									class: selected ? 'case selected' : 'case',
									onclick: () =>
										selected ? browser.deselectCase(case_.path) : void browser.selectCase(case_)
								},
								`${selected ? '☑' : '☐'} ${case_.name}`
							)
						)
					);
				}
			}
			tree.append(
				el(
					'div',
					{ class: 'dataset' },
					el(
						'button',
						{ class: 'dataset-name', onclick: () => void browser.toggleDataset(dataset.name) },
						`${open ? '▾' : '▸'} ${dataset.name}`
					),
					open ? caseList : null
				)
			);
		}

		const runsSection = el('div', { class: 'run-hits' });
		if (runOutputs.length > 0) {
			runsSection.append(el('h3', {}, 'Run outputs'));
			const list = el('ul', {});
			for (const { run, label } of runOutputs) {
				list.append(el('li', {}, `${label} — ${run.casePath} (${run.id})`));
			}
			runsSection.append(list);
		}

		append(container,
			el('div', { class: 'panel-title' }, 'Browser'),
			searchInput,
			error ? el('div', { class: 'error-inline', role: 'alert' }, error) : null,
			noMatches ? el('p', { class: 'muted empty-state' }, 'No matches') : tree,
			noMatches ? null : runsSection
		);
	};

	browser.datasets.subscribe(render);
	browser.casesByDataset.subscribe(render);
	browser.runs.subscribe(render);
	browser.search.subscribe(render);
	browser.error.subscribe(render);
	session.current.subscribe(render);
}
