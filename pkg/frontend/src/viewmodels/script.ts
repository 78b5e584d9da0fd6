// Script-panel view-model: presets, editor content, and run execution.

import { ApiRepository } from '../models/repository';
import type { ExampleScript, RunRecord } from '../models/types';
import { Store } from './observable';
import { BrowserViewModel } from './browser';
import { LayerMatrixViewModel } from './layers';
import { SessionViewModel } from './session';

export class ScriptViewModel {
	readonly presets = new Store<ExampleScript[]>([]);
	readonly isRunning = new Store<boolean>(false);
	readonly lastResults = new Store<RunRecord[]>([]);
	readonly error = new Store<string | null>(null);

	constructor(
		private readonly repo: ApiRepository,
		private readonly session: SessionViewModel,
		private readonly browser: BrowserViewModel,
		private readonly matrix: LayerMatrixViewModel
	) {}

	get content(): string {
		return this.session.state?.ui.scriptEditor.content ?? '';
	}

	setContent(text: string): void {
		this.session.updateState((state) => {
			state.ui.scriptEditor.content = text;
		});
	}

	async loadPresets(): Promise<void> {
		try {
			this.presets.set(await this.repo.fetchExampleScripts());
		} catch (e) {
			this.error.set(e instanceof Error ? e.message : 'failed to load example scripts');
		}
	}

	async loadPreset(scriptId: string): Promise<void> {
		try {
			this.setContent(await this.repo.fetchExampleScriptCode(scriptId));
			this.error.set(null);
		} catch (e) {
			this.error.set(e instanceof Error ? e.message : 'failed to load script');
		}
	}

	/** Run the editor content against every open case. */
	async run(): Promise<RunRecord[]> {
		const workspace = this.session.current.get();
		if (!workspace || this.isRunning.get()) return [];
		const cases = this.session.state?.data.openedCasesPaths ?? [];
		if (cases.length === 0) {
			this.error.set('Open at least one case before running');
			return [];
		}
		this.isRunning.set(true);
		this.error.set(null);
		try {
			const records = await this.repo.runScript(workspace.id, this.content, cases);
			this.lastResults.set(records);
			await this.browser.loadRuns();
			this.matrix.triggerResultsBlink();
			return records;
		} catch (e) {
			this.error.set(e instanceof Error ? e.message : 'run failed');
			return [];
		} finally {
			this.isRunning.set(false);
		}
	}

	resultsByCase(): Map<string, RunRecord[]> {
		const grouped = new Map<string, RunRecord[]>();
		for (const record of this.lastResults.get()) {
			const list = grouped.get(record.casePath) ?? [];
			list.push(record);
			grouped.set(record.casePath, list);
		}
		return grouped;
	}
}
