// @vitest-environment jsdom
//
// View wiring smoke test: mount the whole app against the API fake and walk
// the main flow (welcome -> create workspace -> browse -> select case).

import { beforeEach, describe, expect, it } from 'vitest';
import { ApiRepository } from '../src/models/repository';
import { mountApp } from '../src/views/app';
import { FakeApi } from './helpers';

async function settle(times = 6): Promise<void> {
	for (let i = 0; i < times; i++) {
		await new Promise((resolve) => setTimeout(resolve, 0));
	}
}

function click(element: Element | null): void {
	expect(element, 'expected element to exist').not.toBeNull();
	(element as HTMLElement).dispatchEvent(new MouseEvent('click', { bubbles: true }));
}

describe('application shell', () => {
	let api: FakeApi;
	let root: HTMLElement;

	beforeEach(async () => {
		document.body.innerHTML = '<div id="app"></div>';
		document.body.className = '';
		api = new FakeApi();
		root = document.getElementById('app')!;
		mountApp(root, new ApiRepository(api.fetch));
		await settle();
	});

	it('shows the welcome screen with an empty workspace list', () => {
		expect(root.querySelector('.welcome')).not.toBeNull();
		expect(root.textContent).toContain('No workspaces yet');
	});

	it('creates a workspace and mounts the four-panel workbench', async () => {
		const input = root.querySelector<HTMLInputElement>('.welcome input[type="text"]')!;
		input.value = 'study';
		click(root.querySelector('.welcome button.primary'));
		await settle();

		expect(root.querySelector('.workbench')).not.toBeNull();
		expect(root.querySelector('.browser')).not.toBeNull();
		expect(root.querySelector('.viewers-grid')).not.toBeNull();
		expect(root.querySelector('.matrix')).not.toBeNull();
		expect(root.querySelector('.editor-panel')).not.toBeNull();
		// The dark-mode control is an explicit labeled switch.
		expect(root.querySelector('.dark-switch')?.textContent).toContain('Dark mode');
	});

	it('browses into a dataset, selects a case, and the matrix fills in', async () => {
		const input = root.querySelector<HTMLInputElement>('.welcome input[type="text"]')!;
		input.value = 'study';
		click(root.querySelector('.welcome button.primary'));
		await settle();

		click(root.querySelector('.dataset-name'));
		await settle();
		expect(root.textContent).toContain('patient_001');

		click(root.querySelector('button.case'));
		await settle();
		expect(root.querySelector('.viewer-window')).not.toBeNull();
		const matrixText = root.querySelector('.matrix')?.textContent ?? '';
		expect(matrixText).toContain('t1');
		expect(matrixText).toContain('seg');
	});

	it('dark mode toggle flips the body class', async () => {
		const input = root.querySelector<HTMLInputElement>('.welcome input[type="text"]')!;
		input.value = 'study';
		click(root.querySelector('.welcome button.primary'));
		await settle();

		const checkbox = root.querySelector<HTMLInputElement>('#dark-toggle')!;
		checkbox.checked = true;
		checkbox.dispatchEvent(new Event('change', { bubbles: true }));
		await settle();
		expect(document.body.classList.contains('dark')).toBe(true);
	});

	it('search box reports no matches explicitly', async () => {
		const input = root.querySelector<HTMLInputElement>('.welcome input[type="text"]')!;
		input.value = 'study';
		click(root.querySelector('.welcome button.primary'));
		await settle();

		const search = root.querySelector<HTMLInputElement>('input[type="search"]')!;
		search.value = 'zzz-nothing';
		search.dispatchEvent(new Event('input', { bubbles: true }));
		await settle();
		expect(root.querySelector('.empty-state')?.textContent).toContain('No matches');
	});
});
