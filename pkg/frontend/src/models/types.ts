// Wire types exchanged with the backend. Field names follow the API exactly.

export interface Dataset {
	name: string;
}

export interface Case {
	name: string;
	path: string; // "dataset/case"
}

export interface Layer {
	name: string;
	path: string; // relative to the dataset root
}

export interface ExampleScript {
	id: string;
	name: string;
}

export interface LayerStyle {
	colormap: string;
	opacity: number; // 0..1
	visible: boolean;
}

export interface LayersState {
	openedLayersPathsByCasePath: Record<string, string[]>;
	stylesByLayerName: Record<string, LayerStyle>;
}

export interface WorkspaceState {
	data: {
		openedDatasetsNames: string[];
		openedCasesPaths: string[];
		openedRunsIds: string[];
	};
	lastGlobalStylesByLayerName: Record<string, LayerStyle>;
	datasetLayersState: LayersState;
	runsLayersStates: Record<string, LayersState>;
	ui: {
		isDarkMode: boolean;
		sidebars: { navigation: boolean; layers: boolean; scriptEditor: boolean };
		fullscreenCasePath: string | null;
		layerContext: 'dataset' | 'run';
		scriptEditor: { content: string };
	};
}

export interface Workspace {
	id: string;
	name: string;
	createdAt: string;
	sourceId: string | null;
	state: WorkspaceState;
}

export interface RunRecord {
	id: string;
	workspaceId: string;
	casePath: string;
	timestamp: string;
	scriptText: string;
	status: 'SUCCEEDED' | 'FAILED';
	printOutputs: [string, number][];
	outputLayers: [string, string][];
	log: string;
}
