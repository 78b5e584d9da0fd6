// Browser view-model: the dataset/case/run hierarchy, selection, and search.

import { ApiRepository } from '../models/repository';
import type { Case, Dataset, Layer, RunRecord } from '../models/types';
import { Store } from './observable';
import { SessionViewModel } from './session';

export const MAX_SELECTED_CASES = 8;

export interface SearchResults {
	datasets: { dataset: Dataset; cases: Case[] }[];
	runOutputs: { run: RunRecord; label: string }[];
	noMatches: boolean;
}

export class BrowserViewModel {
	readonly datasets = new Store<Dataset[]>([]);
	readonly casesByDataset = new Store<Record<string, Case[]>>({});
	readonly layersByCasePath = new Store<Record<string, Layer[]>>({});
	readonly runs = new Store<RunRecord[]>([]);
	readonly search = new Store<string>('');
	readonly isLoading = new Store<boolean>(false);
	readonly error = new Store<string | null>(null);

	constructor(
		private readonly repo: ApiRepository,
		private readonly session: SessionViewModel,
		private readonly maxSelectedCases = MAX_SELECTED_CASES
	) {}

	async loadDatasets(): Promise<void> {
		this.isLoading.set(true);
		try {
			this.datasets.set(await this.repo.fetchDatasets());
			this.error.set(null);
		} catch (e) {
			this.error.set(e instanceof Error ? e.message : 'failed to load datasets');
		} finally {
			this.isLoading.set(false);
		}
	}

	isDatasetOpen(name: string): boolean {
		return this.session.state?.data.openedDatasetsNames.includes(name) ?? false;
	}

	async toggleDataset(name: string): Promise<void> {
		if (this.isDatasetOpen(name)) {
			this.session.updateState((state) => {
				state.data.openedDatasetsNames = state.data.openedDatasetsNames.filter(
					(n) => n !== name
				);
			});
			return;
		}
		try {
			if (!(name in this.casesByDataset.get())) {
				const cases = await this.repo.fetchCases(name);
				this.casesByDataset.update((map) => ({ ...map, [name]: cases }));
			}
			this.session.updateState((state) => {
				state.data.openedDatasetsNames = [...state.data.openedDatasetsNames, name];
			});
			this.error.set(null);
		} catch (e) {
			this.error.set(e instanceof Error ? e.message : `failed to load cases for ${name}`);
		}
	}

	selectedCasePaths(): string[] {
		return this.session.state?.data.openedCasesPaths ?? [];
	}

	isCaseSelected(casePath: string): boolean {
		return this.selectedCasePaths().includes(casePath);
	}

	get canSelectMore(): boolean {
		return this.selectedCasePaths().length < this.maxSelectedCases;
	}

	async selectCase(case_: Case): Promise<void> {
		if (this.isCaseSelected(case_.path)) return;
		if (!this.canSelectMore) {
			this.error.set(`Cannot select more than ${this.maxSelectedCases} cases`);
			return;
		}
		this.error.set(null);
		try {
			const layers = await this.repo.fetchLayers(case_.path);
			this.layersByCasePath.update((map) => ({ ...map, [case_.path]: layers }));
			this.session.updateState((state) => {
				state.data.openedCasesPaths = [...state.data.openedCasesPaths, case_.path];
				if (!(case_.path in state.datasetLayersState.openedLayersPathsByCasePath)) {
					state.datasetLayersState.openedLayersPathsByCasePath[case_.path] = [];
				}
			});
		} catch (e) {
			this.error.set(
				e instanceof Error ? e.message : `Failed to load layers for case: ${case_.name}`
			);
		}
	}

	deselectCase(casePath: string): void {
		this.session.updateState((state) => {
			state.data.openedCasesPaths = state.data.openedCasesPaths.filter((p) => p !== casePath);
			delete state.datasetLayersState.openedLayersPathsByCasePath[casePath];
			if (state.ui.fullscreenCasePath === casePath) state.ui.fullscreenCasePath = null;
		});
	}

	/** Restore cases/layers metadata for a reopened workspace. */
	async restoreFromState(): Promise<void> {
		const state = this.session.state;
		if (!state) return;
		for (const name of state.data.openedDatasetsNames) {
			if (!(name in this.casesByDataset.get())) {
				try {
					const cases = await this.repo.fetchCases(name);
					this.casesByDataset.update((map) => ({ ...map, [name]: cases }));
				} catch {
					// dataset may have been removed; browsing it will surface the error
				}
			}
		}
		for (const casePath of state.data.openedCasesPaths) {
			if (!(casePath in this.layersByCasePath.get())) {
				try {
					const layers = await this.repo.fetchLayers(casePath);
					this.layersByCasePath.update((map) => ({ ...map, [casePath]: layers }));
				} catch {
					// same: stale case paths surface as per-view errors later
				}
			}
		}
	}

	async loadRuns(): Promise<void> {
		const workspace = this.session.current.get();
		if (!workspace) return;
		try {
			this.runs.set(await this.repo.fetchRuns(workspace.id));
		} catch (e) {
			this.error.set(e instanceof Error ? e.message : 'failed to load runs');
		}
	}

	/** Search across datasets, cases, and run output labels simultaneously. */
	searchResults(): SearchResults {
		const query = this.search.get().trim().toLowerCase();
		const datasets = this.datasets.get();
		const casesByDataset = this.casesByDataset.get();
		const runs = this.runs.get();

		const datasetRows: SearchResults['datasets'] = [];
		for (const dataset of datasets) {
			const cases = casesByDataset[dataset.name] ?? [];
			if (!query) {
				datasetRows.push({ dataset, cases });
				continue;
			}
			const matching = cases.filter((c) => c.name.toLowerCase().includes(query));
			if (dataset.name.toLowerCase().includes(query)) {
				datasetRows.push({ dataset, cases });
			} else if (matching.length > 0) {
				datasetRows.push({ dataset, cases: matching });
			}
		}

		const runOutputs: SearchResults['runOutputs'] = [];
		if (query) {
			for (const run of runs) {
				for (const [label] of run.outputLayers) {
					if (label.toLowerCase().includes(query)) runOutputs.push({ run, label });
				}
			}
		}

		return {
			datasets: datasetRows,
			runOutputs,
			noMatches: query !== '' && datasetRows.length === 0 && runOutputs.length === 0
		};
	}
}
