import type { LayerStyle, LayersState, WorkspaceState } from './types';

export function defaultWorkspaceState(): WorkspaceState {
	return {
		data: { openedDatasetsNames: [], openedCasesPaths: [], openedRunsIds: [] },
		lastGlobalStylesByLayerName: {},
		datasetLayersState: { openedLayersPathsByCasePath: {}, stylesByLayerName: {} },
		runsLayersStates: {},
		ui: {
			isDarkMode: false,
			sidebars: { navigation: true, layers: true, scriptEditor: true },
			fullscreenCasePath: null,
			layerContext: 'dataset',
			scriptEditor: { content: '' }
		}
	};
}

export function defaultLayersState(): LayersState {
	return { openedLayersPathsByCasePath: {}, stylesByLayerName: {} };
}

export function defaultStyle(colormap = 'gray'): LayerStyle {
	return { colormap, opacity: 1.0, visible: true };
}

export function cloneState(state: WorkspaceState): WorkspaceState {
	return structuredClone(state);
}

/**
 * Mirror of the backend's state-schema rules, used by tests and as a guard
 * before PUTting state. Returns problem descriptions; empty means valid.
 */
export function stateProblems(state: unknown): string[] {
	const problems: string[] = [];
	if (typeof state !== 'object' || state === null || Array.isArray(state)) {
		return ['state must be an object'];
	}
	const s = state as Record<string, unknown>;

	const data = (s.data ?? {}) as Record<string, unknown>;
	for (const key of ['openedDatasetsNames', 'openedCasesPaths', 'openedRunsIds']) {
		const value = data[key] ?? [];
		if (!Array.isArray(value) || value.some((v) => typeof v !== 'string')) {
			problems.push(`data.${key}: must be a list of strings`);
		}
	}
	for (const casePath of (data.openedCasesPaths as unknown[]) ?? []) {
		if (typeof casePath === 'string' && !isRelativePath(casePath)) {
			problems.push(`data.openedCasesPaths: ${casePath} not relative/normalized`);
		}
	}

	checkStyles(s.lastGlobalStylesByLayerName, 'lastGlobalStylesByLayerName', problems);
	if (s.datasetLayersState !== undefined) {
		checkLayersState(s.datasetLayersState, 'datasetLayersState', problems);
	}
	const runsStates = (s.runsLayersStates ?? {}) as Record<string, unknown>;
	if (typeof runsStates !== 'object' || Array.isArray(runsStates)) {
		problems.push('runsLayersStates: must be an object');
	} else {
		for (const [runId, value] of Object.entries(runsStates)) {
			checkLayersState(value, `runsLayersStates[${runId}]`, problems);
		}
	}

	const ui = (s.ui ?? {}) as Record<string, unknown>;
	if ('isDarkMode' in ui && typeof ui.isDarkMode !== 'boolean') {
		problems.push('ui.isDarkMode: must be a boolean');
	}
	const context = ui.layerContext;
	if (context !== undefined && context !== 'dataset' && context !== 'run') {
		problems.push(`ui.layerContext: not one of 'dataset', 'run'`);
	}
	const fullscreen = ui.fullscreenCasePath;
	if (fullscreen !== undefined && fullscreen !== null) {
		if (typeof fullscreen !== 'string' || !isRelativePath(fullscreen)) {
			problems.push('ui.fullscreenCasePath: must be null or a relative path');
		}
	}
	return problems;
}

function checkLayersState(value: unknown, where: string, problems: string[]): void {
	if (typeof value !== 'object' || value === null) {
		problems.push(`${where}: must be an object`);
		return;
	}
	const layers = value as Record<string, unknown>;
	const opened = (layers.openedLayersPathsByCasePath ?? {}) as Record<string, unknown>;
	for (const [casePath, paths] of Object.entries(opened)) {
		if (!isRelativePath(casePath)) {
			problems.push(`${where}: case path ${casePath} not relative/normalized`);
		}
		if (!Array.isArray(paths) || paths.some((p) => typeof p !== 'string' || !isRelativePath(p))) {
			problems.push(`${where}[${casePath}]: layer paths must be relative`);
		}
	}
	checkStyles(layers.stylesByLayerName, `${where}.stylesByLayerName`, problems);
}

function checkStyles(value: unknown, where: string, problems: string[]): void {
	const styles = (value ?? {}) as Record<string, unknown>;
	if (typeof styles !== 'object' || Array.isArray(styles)) {
		problems.push(`${where}: must be an object`);
		return;
	}
	for (const [name, style] of Object.entries(styles)) {
		if (typeof style !== 'object' || style === null) {
			problems.push(`${where}[${name}]: style must be an object`);
			continue;
		}
		const st = style as Record<string, unknown>;
		if (st.opacity !== undefined) {
			if (typeof st.opacity !== 'number' || st.opacity < 0 || st.opacity > 1) {
				problems.push(`${where}[${name}].opacity: outside [0, 1]`);
			}
		}
		if (st.visible !== undefined && typeof st.visible !== 'boolean') {
			problems.push(`${where}[${name}].visible: must be a boolean`);
		}
		if (st.colormap !== undefined && typeof st.colormap !== 'string') {
			problems.push(`${where}[${name}].colormap: must be a string`);
		}
	}
}

function isRelativePath(value: string): boolean {
	if (!value || value.startsWith('/') || value.includes('\\')) return false;
	return value.split('/').every((part) => part !== '' && part !== '.' && part !== '..');
}
