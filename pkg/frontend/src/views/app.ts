// Application shell: welcome screen or the four-panel workbench layout
// (browser left, viewers center, layer matrix bottom, script editor right).

import { ApiRepository } from '../models/repository';
import { BrowserViewModel } from '../viewmodels/browser';
import { LayerMatrixViewModel } from '../viewmodels/layers';
import { ScriptViewModel } from '../viewmodels/script';
import { SessionViewModel } from '../viewmodels/session';
import { clear, el } from './dom';
import { mountBrowser } from './browser';
import { mountEditor } from './editor';
import { mountMatrix } from './matrix';
import { mountViewers } from './viewers';
import { mountWelcome } from './welcome';

export function mountApp(root: HTMLElement, repo: ApiRepository): void {
	const session = new SessionViewModel(repo);
	const browser = new BrowserViewModel(repo, session);
	const matrix = new LayerMatrixViewModel(session, browser);
	const script = new ScriptViewModel(repo, session, browser, matrix);

	let mountedFor: string | null = null;

	const render = () => {
		const workspace = session.current.get();
		document.body.classList.toggle('dark', workspace?.state.ui.isDarkMode ?? false);

		if (!workspace) {
			if (mountedFor !== '') {
				clear(root);
				mountedFor = '';
				mountWelcome(root, session);
			}
			return;
		}
		if (mountedFor === workspace.id) return;
		mountedFor = workspace.id;
		clear(root);

		const header = el(
			'header',
			{ class: 'topbar' },
			el('span', { class: 'brand' }, 'voxlab'),
			el('span', { class: 'workspace-name' }, workspace.name),
			el(
				'span',
				{ class: 'topbar-actions' },
				darkModeSwitch(session),
				el(
					'button',
					{ class: 'small', onclick: () => session.closeWorkspace() },
					'Switch workspace'
				)
			)
		);

		const banner = el('div', { class: 'save-banner', role: 'alert' });
		const left = el('aside', { class: 'panel left' });
		const center = el('main', { class: 'panel center' });
		const bottom = el('section', { class: 'panel bottom' });
		const right = el('aside', { class: 'panel right' });

		root.append(header, banner, el('div', { class: 'workbench' }, left, center, right), bottom);

		mountBrowser(left, browser, session);
		mountViewers(center, repo, session, browser, matrix);
		mountMatrix(bottom, matrix, browser, session);
		mountEditor(right, script, session);

		void browser.loadDatasets().then(() => browser.restoreFromState());
		void browser.loadRuns();
		void script.loadPresets();
	};

	const renderBanner = () => {
		const banner = root.querySelector('.save-banner');
		if (!banner) return;
		const saveError = session.saveError.get();
		clear(banner as HTMLElement);
		if (saveError) {
			banner.append(
				el('span', {}, `Saving failed: ${saveError} `),
				el('button', { class: 'small', onclick: () => void session.retrySave() }, 'Retry')
			);
			banner.classList.add('visible');
		} else {
			banner.classList.remove('visible');
		}
	};

	session.current.subscribe(render);
	session.saveError.subscribe(renderBanner);
	void session.loadWorkspaces();
}

function darkModeSwitch(session: SessionViewModel): HTMLElement {
	const isDark = session.state?.ui.isDarkMode ?? false;
	const checkbox = el('input', { type: 'checkbox', id: 'dark-toggle' });
	if (isDark) checkbox.setAttribute('checked', '');
	checkbox.addEventListener('change', () => {
		session.updateState((state) => {
			state.ui.isDarkMode = checkbox.checked;
		});
		document.body.classList.toggle('dark', checkbox.checked);
	});
	// An explicit labeled switch, not an icon: the label always names the mode.
	return el(
		'label',
		{ class: 'dark-switch', for: 'dark-toggle' },
		checkbox,
		el('span', {}, 'Dark mode')
	);
}
