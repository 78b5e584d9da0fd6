// Repository: every request stays inside the documented route table, and
// errors surface as RepositoryError with useful messages.

import { describe, expect, it } from 'vitest';
import { ApiRepository, RepositoryError } from '../src/models/repository';
import { composeSliceRGBA, colormapColor, parseHexColor } from '../src/colormaps';
import { FakeApi } from './helpers';

const ROUTE_TABLE = [
	/^\/datasets$/,
	/^\/datasets\/[^/]+$/,
	/^\/datasets\/[^/]+\/cases$/,
	/^\/datasets\/[^/]+\/cases\/[^/]+\/layers$/,
	/^\/datasets\/[^/]+\/cases\/[^/]+\/layers\/[^/]+$/,
	/^\/scripts$/,
	/^\/scripts\/[^/]+$/,
	/^\/workspaces$/,
	/^\/workspaces\/[^/]+$/,
	/^\/workspaces\/[^/]+\/runs$/,
	/^\/run$/,
	/^\/workspaces\/[^/]+\/[^/]+\/[^/]+\/layers\/[^/]+$/
];

describe('route confinement', () => {
	it('every repository method hits a documented route', async () => {
		const api = new FakeApi();
		const repo = new ApiRepository(api.fetch);

		await repo.fetchDatasets();
		await repo.fetchCases('BraTS2019');
		await repo.fetchLayers('BraTS2019/patient_001');
		await repo.fetchLayerBytes('BraTS2019/patient_001', 't1');
		await repo.fetchExampleScripts();
		await repo.fetchExampleScriptCode('threshold');
		const ws = await repo.createWorkspace('a');
		await repo.listWorkspaces();
		await repo.getWorkspace(ws.id);
		await repo.saveWorkspace(ws.id, { name: 'renamed' });
		await repo.fetchRuns(ws.id);
		const runs = await repo.runScript(ws.id, 'save "bright" t1 > 3', ['BraTS2019/patient_001']);
		await repo.fetchRunOutputBytes(ws.id, 'BraTS2019/patient_001', runs[0]!.id, 'bright');
		await repo.deleteWorkspace(ws.id);

		for (const { path } of api.requests) {
			expect(
				ROUTE_TABLE.some((pattern) => pattern.test(path)),
				`undocumented request: ${path}`
			).toBe(true);
		}
	});

	it('percent-encodes the case path into a single segment', async () => {
		const api = new FakeApi();
		const repo = new ApiRepository(api.fetch);
		const ws = await repo.createWorkspace('a');
		await repo.fetchRunOutputBytes(ws.id, 'BraTS2019/patient_001', 'run-1', 'hi');
		const last = api.requests[api.requests.length - 1]!;
		expect(last.path).toContain('BraTS2019%2Fpatient_001');
	});

	it('wraps HTTP errors with the server message', async () => {
		const api = new FakeApi();
		const repo = new ApiRepository(api.fetch);
		await expect(repo.getWorkspace('missing')).rejects.toThrowError(RepositoryError);
		await expect(repo.getWorkspace('missing')).rejects.toThrow(/unknown workspace/);
	});

	it('wraps network failures', async () => {
		const repo = new ApiRepository(async () => {
			throw new TypeError('boom');
		});
		await expect(repo.fetchDatasets()).rejects.toThrow(/network error/);
	});

	it('rejects malformed case paths before any request', async () => {
		const api = new FakeApi();
		const repo = new ApiRepository(api.fetch);
		await expect(repo.fetchLayers('justonesegment')).rejects.toThrow(/malformed/);
		expect(api.requests).toEqual([]);
	});
});

describe('colormaps and compositing', () => {
	it('preset colors scale with intensity', () => {
		expect(colormapColor('cyan', 1)).toEqual([0, 255, 255]);
		expect(colormapColor('magenta', 0.5)).toEqual([127.5, 0, 127.5]);
		expect(colormapColor('yellow', 0)).toEqual([0, 0, 0]);
		expect(colormapColor('gray', 2)).toEqual([255, 255, 255]); // clamped
	});

	it('custom hex colors parse and scale', () => {
		expect(parseHexColor('#336699')).toEqual([0x33, 0x66, 0x99]);
		expect(parseHexColor('zzz')).toEqual([255, 255, 255]);
		expect(colormapColor('custom:#ff0000', 0.5)).toEqual([127.5, 0, 0]);
	});

	it('composites layers by opacity in order over black', () => {
		const slice = { width: 1, height: 1, values: new Float32Array([1]) };
		const rgba = composeSliceRGBA(
			[
				{ slice, style: { colormap: 'gray', opacity: 1, visible: true }, range: [0, 1] },
				{ slice, style: { colormap: 'red', opacity: 0.5, visible: true }, range: [0, 1] }
			],
			1,
			1
		);
		// gray 255 under red at 50%: r stays 255, g/b halve.
		expect([...rgba]).toEqual([255, 128, 128, 255]);
	});

	it('invisible or zero-opacity layers contribute nothing', () => {
		const slice = { width: 1, height: 1, values: new Float32Array([1]) };
		const rgba = composeSliceRGBA(
			[
				{ slice, style: { colormap: 'gray', opacity: 0, visible: true }, range: [0, 1] },
				{ slice, style: { colormap: 'gray', opacity: 1, visible: false }, range: [0, 1] }
			],
			1,
			1
		);
		expect([...rgba]).toEqual([0, 0, 0, 255]);
	});
});
