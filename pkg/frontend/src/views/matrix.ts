// Bottom panel: tabbed layer matrix (dataset layers vs. run results).

import { PRESET_COLORMAPS, LayerMatrixViewModel } from '../viewmodels/layers';
import { BrowserViewModel } from '../viewmodels/browser';
import { SessionViewModel } from '../viewmodels/session';
import { clear, el } from './dom';

export function mountMatrix(
	root: HTMLElement,
	matrix: LayerMatrixViewModel,
	browser: BrowserViewModel,
	session: SessionViewModel
): void {
	const container = el('div', { class: 'matrix' });
	root.append(container);

	const render = () => {
		clear(container);
		const context = matrix.context;
		const blink = matrix.resultsBlink.get();

		const tabs = el(
			'div',
			{ class: 'tabs', role: 'tablist' },
			el(
				'button',
				{
					role: 'tab',
					class: context === 'dataset' ? 'tab active' : 'tab',
					onclick: () => matrix.setContext('dataset')
				},
				'Dataset layers'
			),
			el(
				'button',
				{
					role: 'tab',
					class: `tab${context === 'run' ? ' active' : ''}${blink ? ' blink' : ''}`,
					onclick: () => matrix.setContext('run')
				},
				'Run results'
			)
		);

		const cases = matrix.openCases();
		const rows = context === 'dataset' ? matrix.datasetRows() : matrix.runRows();

		const table = el('table', { class: 'matrix-table' });
		const headRow = el('tr', {}, el('th', {}, 'Layer'), el('th', {}, 'Style'));
		for (const casePath of cases) {
			headRow.append(el('th', { class: 'case-col' }, casePath.split('/')[1] ?? casePath));
		}
		table.append(headRow);

		for (const row of rows) {
			const tr = el('tr', {});
			const available = row.cells.filter((c) => c.layerPath !== null);
			const allOpen = available.length > 0 && available.every((c) => c.open);
			tr.append(
				el(
					'td',
					{},
					el(
						'button',
						{
							class: 'row-toggle',
							title: 'Toggle this layer in every case',
							onclick: () => {
								if (context === 'dataset') matrix.toggleRow(row.layerName);
							}
						},
						`${allOpen ? '●' : '○'} ${row.layerName}`
					)
				),
				styleCell(row.layerName, row.style, matrix, context)
			);
			for (const cell of row.cells) {
				if (cell.layerPath === null) {
					tr.append(el('td', { class: 'cell-missing' }, '—'));
					continue;
				}
				tr.append(
					el(
						'td',
						{},
						el(
							'button',
							{
								class: cell.open ? 'cell on' : 'cell',
								onclick: () => {
									if (context === 'dataset') {
										matrix.toggleCell(cell.casePath, row.layerName);
									} else {
										const [runId] = (cell.layerPath as string).split('/');
										matrix.toggleRunCell(runId ?? '', cell.casePath, row.layerName);
									}
								}
							},
							cell.open ? '✔' : '·'
						)
					)
				);
			}
			table.append(tr);
		}

		container.append(
			tabs,
			rows.length === 0
				? el('p', { class: 'muted' }, context === 'dataset'
					? 'Open a case and its layers appear here.'
					: 'Run a script to see result layers here.')
				: table
		);
	};

	const styleCell = (
		layerName: string,
		style: { colormap: string; opacity: number; visible: boolean },
		vm: LayerMatrixViewModel,
		context: 'dataset' | 'run'
	) => {
		const select = el('select', {
			'aria-label': `Colormap for ${layerName}`,
			onchange: (event) => {
				const value = (event.target as HTMLSelectElement).value;
				if (value === 'custom') {
					colorInput.style.display = '';
					vm.setStyle(layerName, { colormap: `custom:${colorInput.value}` });
				} else {
					colorInput.style.display = 'none';
					vm.setStyle(layerName, { colormap: value });
				}
			}
		});
		for (const name of PRESET_COLORMAPS) {
			const option = el('option', { value: name }, name);
			if (style.colormap === name) option.setAttribute('selected', '');
			select.append(option);
		}
		const customOption = el('option', { value: 'custom' }, 'custom…');
		if (style.colormap.startsWith('custom:')) customOption.setAttribute('selected', '');
		select.append(customOption);

		const colorInput = el('input', {
			type: 'color',
			value: style.colormap.startsWith('custom:') ? style.colormap.slice(7) : '#ff8800',
			'aria-label': `Custom color for ${layerName}`,
			oninput: (event) =>
				vm.setStyle(layerName, {
					colormap: `custom:${(event.target as HTMLInputElement).value}`
				})
		});
		if (!style.colormap.startsWith('custom:')) colorInput.style.display = 'none';

		const opacity = el('input', {
			type: 'range',
			min: '0',
			max: '1',
			step: '0.05',
			value: String(style.opacity),
			'aria-label': `Opacity for ${layerName}`,
			oninput: (event) =>
				vm.setStyle(layerName, { opacity: Number((event.target as HTMLInputElement).value) })
		});

		const visible = el(
			'button',
			{
				class: 'small',
				title: 'Show or hide this layer everywhere',
				onclick: () => vm.setStyle(layerName, { visible: !style.visible })
			},
			style.visible ? 'visible' : 'hidden'
		);

		if (context === 'run') {
			// Run-result styles are per run; the shared controls still apply the
			// same patch through setStyle's run-aware counterpart.
			select.setAttribute('disabled', '');
		}
		return el('td', { class: 'style-cell' }, select, colorInput, opacity, visible);
	};

	session.current.subscribe(render);
	browser.layersByCasePath.subscribe(render);
	browser.runs.subscribe(render);
	matrix.resultsBlink.subscribe(render);
}
