// Center panel: one viewer window per open case, each showing the three
// orthogonal planes on canvases with a shared crosshair and PNG export.

import { composeSliceRGBA, type SliceLayer } from '../colormaps';
import { decodeNifti } from '../models/nifti';
import { extractSlice, sliceCount, valueRange, type Plane, type Volume } from '../models/volume';
import { ApiRepository } from '../models/repository';
import { BrowserViewModel } from '../viewmodels/browser';
import { LayerMatrixViewModel } from '../viewmodels/layers';
import { SessionViewModel } from '../viewmodels/session';
import { ViewerViewModel } from '../viewmodels/viewer';
import { clear, el } from './dom';

const PLANES: Plane[] = ['axial', 'sagittal', 'coronal'];

interface LayerKeyInfo {
	key: string; // "dataset:<layerPath>" or "run:<runId>/<label>"
	styleName: string;
}

export function mountViewers(
	root: HTMLElement,
	repo: ApiRepository,
	session: SessionViewModel,
	browser: BrowserViewModel,
	matrix: LayerMatrixViewModel
): void {
	const grid = el('div', { class: 'viewers-grid' });
	root.append(grid);
	const viewerVMs = new Map<string, ViewerViewModel>();

	const fetcherFor = (casePath: string) => async (key: string): Promise<Volume> => {
		if (key.startsWith('dataset:')) {
			const layerPath = key.slice('dataset:'.length);
			const fileName = layerPath.split('/').pop() ?? '';
			const layerName = fileName.replace(/\.nii(\.gz)?$/, '');
			return decodeNifti(await repo.fetchLayerBytes(casePath, layerName));
		}
		const rest = key.slice('run:'.length);
		const [runId, label] = splitOnce(rest, '/');
		const workspace = session.current.get();
		if (!workspace) throw new Error('no workspace');
		return decodeNifti(await repo.fetchRunOutputBytes(workspace.id, casePath, runId, label));
	};

	const wantedLayers = (casePath: string): LayerKeyInfo[] => {
		const state = session.state;
		if (!state) return [];
		const out: LayerKeyInfo[] = [];
		for (const layerPath of state.datasetLayersState.openedLayersPathsByCasePath[casePath] ?? []) {
			const fileName = layerPath.split('/').pop() ?? '';
			out.push({
				key: `dataset:${layerPath}`,
				styleName: fileName.replace(/\.nii(\.gz)?$/, '')
			});
		}
		for (const runId of state.data.openedRunsIds) {
			const opened = state.runsLayersStates[runId]?.openedLayersPathsByCasePath[casePath] ?? [];
			for (const label of opened) {
				out.push({ key: `run:${runId}/${label}`, styleName: label });
			}
		}
		return out;
	};

	const render = () => {
		clear(grid);
		const state = session.state;
		if (!state) return;
		refreshViewerStyles(session);
		const fullscreen = state.ui.fullscreenCasePath;
		const cases = fullscreen ? [fullscreen] : state.data.openedCasesPaths;
		grid.classList.toggle('fullscreen', fullscreen !== null);

		for (const casePath of cases) {
			let vm = viewerVMs.get(casePath);
			if (!vm) {
				vm = new ViewerViewModel(fetcherFor(casePath));
				viewerVMs.set(casePath, vm);
				vm.volumes.subscribe(render);
				vm.crosshair.subscribe(render);
				vm.error.subscribe(render);
			}
			const layers = wantedLayers(casePath);
			void vm.syncLayers(layers.map((l) => l.key));
			grid.append(viewerWindow(casePath, vm, layers, session, matrix));
		}
		for (const casePath of [...viewerVMs.keys()]) {
			if (!state.data.openedCasesPaths.includes(casePath)) viewerVMs.delete(casePath);
		}
	};

	session.current.subscribe(render);
	browser.layersByCasePath.subscribe(render);
	browser.runs.subscribe(render);
}

function viewerWindow(
	casePath: string,
	vm: ViewerViewModel,
	layers: LayerKeyInfo[],
	session: SessionViewModel,
	matrix: LayerMatrixViewModel
): HTMLElement {
	const reference = vm.referenceVolume();
	const error = vm.error.get();
	const body = el('div', { class: 'viewer-body' });

	if (error) {
		body.append(el('div', { class: 'error-tile', role: 'alert' }, error));
	} else if (!reference) {
		body.append(el('div', { class: 'muted viewer-hint' }, 'Toggle a layer to display it'));
	} else {
		for (const plane of PLANES) {
			body.append(planeView(plane, vm, layers, reference));
		}
	}

	const isFullscreen = session.state?.ui.fullscreenCasePath === casePath;
	return el(
		'section',
		{ class: 'viewer-window', 'data-case': casePath },
		el(
			'header',
			{},
			el('span', { class: 'viewer-title' }, casePath),
			el(
				'span',
				{ class: 'viewer-actions' },
				el(
					'button',
					{ class: 'small', title: 'Save a PNG screenshot', onclick: () => screenshot(body, casePath) },
					'Screenshot'
				),
				el(
					'button',
					{
						class: 'small',
						onclick: () =>
							session.updateState((state) => {
								state.ui.fullscreenCasePath = isFullscreen ? null : casePath;
							})
					},
					isFullscreen ? 'Exit fullscreen' : 'Fullscreen'
				)
			)
		),
		body
	);
}

function planeView(
	plane: Plane,
	vm: ViewerViewModel,
	layers: LayerKeyInfo[],
	reference: Volume
): HTMLElement {
	const crosshair = vm.crosshair.get();
	const index = plane === 'axial' ? crosshair.z : plane === 'sagittal' ? crosshair.x : crosshair.y;
	const volumes = vm.volumes.get();

	const sliceLayers: SliceLayer[] = [];
	for (const info of layers) {
		const volume = volumes.get(info.key);
		if (!volume || volume.dims.join() !== reference.dims.join()) continue;
		sliceLayers.push({
			slice: extractSlice(volume, plane, index),
			style: styleForKey(info.key),
			range: valueRange(volume)
		});
	}

	const first = sliceLayers[0];
	const width = first?.slice.width ?? reference.dims[0];
	const height = first?.slice.height ?? reference.dims[1];

	const canvas = el('canvas', { class: 'slice-canvas', 'data-plane': plane });
	canvas.width = width;
	canvas.height = height;
	const ctx = canvas.getContext('2d');
	if (ctx) {
		const rgba = composeSliceRGBA(sliceLayers, width, height);
		ctx.putImageData(new ImageData(new Uint8ClampedArray(rgba), width, height), 0, 0);
		drawCrosshair(ctx, plane, crosshair, width, height);
	}

	canvas.addEventListener('click', (event) => {
		const rect = canvas.getBoundingClientRect();
		const i = Math.floor(((event.clientX - rect.left) / rect.width) * width);
		const j = Math.floor(((event.clientY - rect.top) / rect.height) * height);
		if (plane === 'axial') vm.setCrosshair({ x: i, y: j });
		else if (plane === 'sagittal') vm.setCrosshair({ y: i, z: j });
		else vm.setCrosshair({ x: i, z: j });
	});

	const max = sliceCount(reference, plane) - 1;
	const slider = el('input', {
		type: 'range',
		min: '0',
		max: String(max),
		value: String(Math.min(index, max)),
		'aria-label': `${plane} slice index`,
		oninput: (event) => {
			const value = Number((event.target as HTMLInputElement).value);
			if (plane === 'axial') vm.setCrosshair({ z: value });
			else if (plane === 'sagittal') vm.setCrosshair({ x: value });
			else vm.setCrosshair({ y: value });
		}
	});

	return el(
		'figure',
		{ class: 'plane' },
		canvas,
		el('figcaption', {}, `${plane} ${Math.min(index, max)}`),
		slider
	);
}

// Styles for viewer layers come from the matrix's saved styles; the plane
// renderer reads them from a snapshot map refreshed per render pass.
function styleForKey(key: string) {
	return currentStyles.get(key) ?? { colormap: 'gray', opacity: 1, visible: true };
}

const currentStyles = new Map<string, { colormap: string; opacity: number; visible: boolean }>();

export function refreshViewerStyles(session: SessionViewModel): void {
	currentStyles.clear();
	const state = session.state;
	if (!state) return;
	for (const [casePath, layerPaths] of Object.entries(
		state.datasetLayersState.openedLayersPathsByCasePath
	)) {
		void casePath;
		for (const layerPath of layerPaths) {
			const fileName = layerPath.split('/').pop() ?? '';
			const name = fileName.replace(/\.nii(\.gz)?$/, '');
			const style =
				state.datasetLayersState.stylesByLayerName[name] ??
				state.lastGlobalStylesByLayerName[name];
			if (style) currentStyles.set(`dataset:${layerPath}`, style);
		}
	}
	for (const [runId, runState] of Object.entries(state.runsLayersStates)) {
		for (const labels of Object.values(runState.openedLayersPathsByCasePath)) {
			for (const label of labels) {
				const style = runState.stylesByLayerName[label];
				if (style) currentStyles.set(`run:${runId}/${label}`, style);
			}
		}
	}
}

function drawCrosshair(
	ctx: CanvasRenderingContext2D,
	plane: Plane,
	crosshair: { x: number; y: number; z: number },
	width: number,
	height: number
): void {
	const [i, j] =
		plane === 'axial'
			? [crosshair.x, crosshair.y]
			: plane === 'sagittal'
				? [crosshair.y, crosshair.z]
				: [crosshair.x, crosshair.z];
	ctx.strokeStyle = 'rgba(255, 200, 0, 0.9)';
	ctx.lineWidth = Math.max(1, width / 256);
	ctx.beginPath();
	ctx.moveTo(i + 0.5, 0);
	ctx.lineTo(i + 0.5, height);
	ctx.moveTo(0, j + 0.5);
	ctx.lineTo(width, j + 0.5);
	ctx.stroke();
}

function screenshot(body: HTMLElement, casePath: string): void {
	const canvases = [...body.querySelectorAll('canvas')];
	if (canvases.length === 0) return;
	const scale = 4;
	const total = el('canvas');
	total.width = canvases.reduce((w, c) => w + c.width * scale, 0);
	total.height = Math.max(...canvases.map((c) => c.height * scale));
	const ctx = total.getContext('2d');
	if (!ctx) return;
	ctx.imageSmoothingEnabled = false;
	let x = 0;
	for (const canvas of canvases) {
		ctx.drawImage(canvas, x, 0, canvas.width * scale, canvas.height * scale);
		x += canvas.width * scale;
	}
	const stamp = new Date().toISOString().replace(/[:.]/g, '-');
	const link = el('a', {
		href: total.toDataURL('image/png'),
		download: `${casePath.replace('/', '_')}-${stamp}.png`
	});
	link.click();
}

function splitOnce(text: string, sep: string): [string, string] {
	const at = text.indexOf(sep);
	return at < 0 ? [text, ''] : [text.slice(0, at), text.slice(at + 1)];
}
