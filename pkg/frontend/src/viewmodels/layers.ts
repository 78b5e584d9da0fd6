// Layer-matrix view-model: rows are layer names, columns are open cases,
// with per-row styles and a dataset/run-results tab switch.

import type { Layer, LayerStyle, RunRecord } from '../models/types';
import { defaultStyle } from '../models/state';
import { Store } from './observable';
import { BrowserViewModel } from './browser';
import { SessionViewModel } from './session';

export const RESULTS_BLINK_MS = 300;

export const PRESET_COLORMAPS = [
	'gray',
	'cyan',
	'magenta',
	'yellow',
	'red',
	'green',
	'blue'
];

export interface MatrixCell {
	casePath: string;
	layerPath: string | null; // null when the case has no layer of this name
	open: boolean;
}

export interface MatrixRow {
	layerName: string;
	style: LayerStyle;
	cells: MatrixCell[];
}

export class LayerMatrixViewModel {
	/** Briefly true right after a run completes, to highlight the results tab. */
	readonly resultsBlink = new Store<boolean>(false);
	private blinkTimer: ReturnType<typeof setTimeout> | null = null;

	constructor(
		private readonly session: SessionViewModel,
		private readonly browser: BrowserViewModel
	) {}

	get context(): 'dataset' | 'run' {
		return this.session.state?.ui.layerContext ?? 'dataset';
	}

	setContext(context: 'dataset' | 'run'): void {
		this.session.updateState((state) => {
			state.ui.layerContext = context;
		});
	}

	openCases(): string[] {
		return this.session.state?.data.openedCasesPaths ?? [];
	}

	// Dataset tab -------------------------------------------------------------

	private caseLayers(casePath: string): Layer[] {
		return this.browser.layersByCasePath.get()[casePath] ?? [];
	}

	datasetRows(): MatrixRow[] {
		const state = this.session.state;
		if (!state) return [];
		const cases = this.openCases();
		const names = new Set<string>();
		for (const casePath of cases) {
			for (const layer of this.caseLayers(casePath)) names.add(layer.name);
		}
		return [...names].sort().map((layerName) => ({
			layerName,
			style: this.styleOf(layerName),
			cells: cases.map((casePath) => {
				const layer = this.caseLayers(casePath).find((l) => l.name === layerName);
				const opened = state.datasetLayersState.openedLayersPathsByCasePath[casePath] ?? [];
				return {
					casePath,
					layerPath: layer?.path ?? null,
					open: layer !== undefined && opened.includes(layer.path)
				};
			})
		}));
	}

	styleOf(layerName: string): LayerStyle {
		const state = this.session.state;
		return (
			state?.datasetLayersState.stylesByLayerName[layerName] ??
			state?.lastGlobalStylesByLayerName[layerName] ??
			defaultStyle()
		);
	}

	setStyle(layerName: string, patch: Partial<LayerStyle>): void {
		const merged = { ...this.styleOf(layerName), ...patch };
		this.session.updateState((state) => {
			state.datasetLayersState.stylesByLayerName[layerName] = merged;
			state.lastGlobalStylesByLayerName[layerName] = merged;
		});
	}

	toggleCell(casePath: string, layerName: string): void {
		const layer = this.caseLayers(casePath).find((l) => l.name === layerName);
		if (!layer) return;
		this.session.updateState((state) => {
			const byCase = state.datasetLayersState.openedLayersPathsByCasePath;
			const opened = byCase[casePath] ?? [];
			byCase[casePath] = opened.includes(layer.path)
				? opened.filter((p) => p !== layer.path)
				: [...opened, layer.path];
			if (!(layerName in state.datasetLayersState.stylesByLayerName)) {
				state.datasetLayersState.stylesByLayerName[layerName] = this.styleOf(layerName);
			}
		});
	}

	/** Global per-row toggle: open everywhere, or close everywhere if all open. */
	toggleRow(layerName: string): void {
		const row = this.datasetRows().find((r) => r.layerName === layerName);
		if (!row) return;
		const available = row.cells.filter((c) => c.layerPath !== null);
		const allOpen = available.length > 0 && available.every((c) => c.open);
		this.session.updateState((state) => {
			const byCase = state.datasetLayersState.openedLayersPathsByCasePath;
			for (const cell of available) {
				const opened = byCase[cell.casePath] ?? [];
				const path = cell.layerPath as string;
				byCase[cell.casePath] = allOpen
					? opened.filter((p) => p !== path)
					: opened.includes(path)
						? opened
						: [...opened, path];
			}
			if (!(layerName in state.datasetLayersState.stylesByLayerName)) {
				state.datasetLayersState.stylesByLayerName[layerName] = this.styleOf(layerName);
			}
		});
	}

	// Run-results tab ------------------------------------------------------------

	runsForCase(casePath: string): RunRecord[] {
		return this.browser.runs.get().filter((r) => r.casePath === casePath);
	}

	runRows(): MatrixRow[] {
		const state = this.session.state;
		if (!state) return [];
		const cases = this.openCases();
		const labels = new Set<string>();
		const openRunIds = new Set(state.data.openedRunsIds);
		const runs = this.browser.runs.get().filter((r) => openRunIds.has(r.id));
		for (const run of runs) {
			for (const [label] of run.outputLayers) labels.add(label);
		}
		return [...labels].sort().map((label) => ({
			layerName: label,
			style: this.runStyleOf(label),
			cells: cases.map((casePath) => {
				const run = runs.find(
					(r) => r.casePath === casePath && r.outputLayers.some(([l]) => l === label)
				);
				if (!run) return { casePath, layerPath: null, open: false };
				const key = `${run.id}/${label}`;
				const opened =
					state.runsLayersStates[run.id]?.openedLayersPathsByCasePath[casePath] ?? [];
				return { casePath, layerPath: key, open: opened.includes(label) };
			})
		}));
	}

	runStyleOf(label: string): LayerStyle {
		const state = this.session.state;
		if (!state) return defaultStyle('cyan');
		for (const runState of Object.values(state.runsLayersStates)) {
			const style = runState.stylesByLayerName[label];
			if (style) return style;
		}
		return defaultStyle('cyan');
	}

	toggleRunCell(runId: string, casePath: string, label: string): void {
		this.session.updateState((state) => {
			const runState = (state.runsLayersStates[runId] ??= {
				openedLayersPathsByCasePath: {},
				stylesByLayerName: {}
			});
			const opened = runState.openedLayersPathsByCasePath[casePath] ?? [];
			runState.openedLayersPathsByCasePath[casePath] = opened.includes(label)
				? opened.filter((l) => l !== label)
				: [...opened, label];
			if (!(label in runState.stylesByLayerName)) {
				runState.stylesByLayerName[label] = this.runStyleOf(label);
			}
			if (!state.data.openedRunsIds.includes(runId)) {
				state.data.openedRunsIds = [...state.data.openedRunsIds, runId];
			}
		});
	}

	/** Fire the 300 ms results-tab highlight exactly once per completed run. */
	triggerResultsBlink(): void {
		if (this.blinkTimer !== null) clearTimeout(this.blinkTimer);
		this.resultsBlink.set(true);
		this.blinkTimer = setTimeout(() => {
			this.resultsBlink.set(false);
			this.blinkTimer = null;
		}, RESULTS_BLINK_MS);
	}
}
