// Test helpers: hand-authored NIfTI fixtures and an in-memory API fake that
// implements exactly the documented route table.

import { gzipSync } from 'node:zlib';
import type { RunRecord, Workspace, WorkspaceState } from '../src/models/types';
import { defaultWorkspaceState } from '../src/models/state';
import type { FetchLike } from '../src/models/repository';

/**
 * Build NIfTI-1 bytes for an (nx, ny, nz) uint8 volume whose voxel value at
 * (x, y, z) is its linear index modulo 256. Written field by field, not via
 * any production writer.
 */
export function niftiFixture(nx: number, ny: number, nz: number): Uint8Array {
	const count = nx * ny * nz;
	const bytes = new Uint8Array(348 + 4 + count);
	const view = new DataView(bytes.buffer);
	view.setInt32(0, 348, true); // sizeof_hdr
	view.setInt16(40, 3, true); // dim[0]
	view.setInt16(42, nx, true);
	view.setInt16(44, ny, true);
	view.setInt16(46, nz, true);
	for (let d = 4; d <= 7; d++) view.setInt16(40 + 2 * d, 1, true);
	view.setInt16(70, 2, true); // datatype: uint8
	view.setInt16(72, 8, true); // bitpix
	for (let i = 0; i <= 3; i++) view.setFloat32(76 + 4 * i, 1.0, true); // pixdim
	view.setFloat32(108, 352.0, true); // vox_offset
	bytes[344] = 0x6e; // n
	bytes[345] = 0x2b; // +
	bytes[346] = 0x31; // 1
	bytes[347] = 0x00;
	for (let i = 0; i < count; i++) bytes[352 + i] = i % 256;
	return bytes;
}

export function gzNiftiFixture(nx: number, ny: number, nz: number): Uint8Array {
	return new Uint8Array(gzipSync(niftiFixture(nx, ny, nz)));
}

interface FakeRun extends RunRecord {}

/** In-memory stand-in for the backend; records every request it serves. */
export class FakeApi {
	requests: { method: string; path: string }[] = [];
	workspaces = new Map<string, Workspace>();
	savedStates = new Map<string, WorkspaceState>();
	runs: FakeRun[] = [];
	failNextSave = false;
	private nextId = 1;

	datasets = ['BraTS2019'];
	casesByDataset: Record<string, { name: string; path: string }[]> = {
		BraTS2019: [
			{ name: 'patient_001', path: 'BraTS2019/patient_001' },
			{ name: 'patient_002', path: 'BraTS2019/patient_002' },
			{ name: 'patient_003', path: 'BraTS2019/patient_003' },
			{ name: 'patient_004', path: 'BraTS2019/patient_004' },
			{ name: 'patient_005', path: 'BraTS2019/patient_005' },
			{ name: 'patient_006', path: 'BraTS2019/patient_006' },
			{ name: 'patient_007', path: 'BraTS2019/patient_007' },
			{ name: 'patient_008', path: 'BraTS2019/patient_008' },
			{ name: 'patient_009', path: 'BraTS2019/patient_009' }
		]
	};
	layers = [
		{ name: 'seg', path: 'BraTS2019/patient_001/seg.nii.gz' },
		{ name: 't1', path: 'BraTS2019/patient_001/t1.nii.gz' }
	];
	scripts = [{ id: 'threshold', name: 'threshold' }];
	scriptCode = 'save "bright" t1 > 3\n';

	fetch: FetchLike = async (input, init) => {
		const url = typeof input === 'string' ? input : input instanceof URL ? input.href : input.url;
		const method = init?.method ?? 'GET';
		const path = url.replace(/^https?:\/\/[^/]+/, '');
		this.requests.push({ method, path });
		return this.route(method, path, init);
	};

	private route(method: string, path: string, init?: RequestInit): Response {
		const segments = path.split('/').slice(1).map(decodeURIComponent);

		if (method === 'GET' && path === '/datasets') {
			return json(this.datasets.map((name) => ({ name })));
		}
		if (method === 'GET' && segments[0] === 'datasets' && segments[2] === 'cases' && segments.length === 3) {
			const cases = this.casesByDataset[segments[1] ?? ''];
			return cases ? json(cases) : notFound('unknown dataset');
		}
		if (method === 'GET' && segments[0] === 'datasets' && segments[4] === 'layers' && segments.length === 5) {
			return json(this.layers);
		}
		if (method === 'GET' && segments[0] === 'datasets' && segments[4] === 'layers' && segments.length === 6) {
			return binary(niftiFixture(2, 2, 2));
		}
		if (method === 'GET' && path === '/scripts') {
			return json(this.scripts);
		}
		if (method === 'GET' && segments[0] === 'scripts' && segments.length === 2) {
			return this.scripts.some((s) => s.id === segments[1])
				? text(this.scriptCode)
				: notFound('unknown script');
		}
		if (path === '/workspaces' && method === 'GET') {
			return json([...this.workspaces.values()].map(({ id, name }) => ({ id, name })));
		}
		if (path === '/workspaces' && method === 'POST') {
			const body = JSON.parse(String(init?.body ?? '{}'));
			if (!body.name) return badRequest("missing field 'name'");
			let state = defaultWorkspaceState();
			if (body.sourceId) {
				const source = this.workspaces.get(body.sourceId);
				if (!source) return notFound('unknown source workspace');
				state = structuredClone(source.state);
			}
			const workspace: Workspace = {
				id: `ws-${this.nextId++}-abcdefgh`,
				name: body.name,
				createdAt: '2026-01-01T00:00:00Z',
				sourceId: body.sourceId ?? null,
				state
			};
			this.workspaces.set(workspace.id, workspace);
			return json(workspace, 201);
		}
		if (segments[0] === 'workspaces' && segments.length === 2) {
			const workspace = this.workspaces.get(segments[1] ?? '');
			if (!workspace) return notFound('unknown workspace');
			if (method === 'GET') return json(workspace);
			if (method === 'PUT') {
				if (this.failNextSave) {
					this.failNextSave = false;
					return new Response(JSON.stringify({ message: 'disk full' }), { status: 500 });
				}
				const body = JSON.parse(String(init?.body ?? '{}'));
				if (body.state) {
					workspace.state = body.state;
					this.savedStates.set(workspace.id, structuredClone(body.state));
				}
				if (body.name) workspace.name = body.name;
				return json({ ok: true });
			}
			if (method === 'DELETE') {
				this.workspaces.delete(segments[1] ?? '');
				return json({ ok: true });
			}
		}
		if (method === 'GET' && segments[0] === 'workspaces' && segments[2] === 'runs') {
			return this.workspaces.has(segments[1] ?? '')
				? json(this.runs)
				: notFound('unknown workspace');
		}
		if (method === 'POST' && path === '/run') {
			const body = JSON.parse(String(init?.body ?? '{}'));
			if (!body.workspaceId || body.scriptContent === undefined || !Array.isArray(body.cases)) {
				return badRequest('missing fields');
			}
			if (!this.workspaces.has(body.workspaceId)) return notFound('unknown workspace');
			const records: FakeRun[] = body.cases.map((casePath: string, index: number) => ({
				id: `run-20260101T00000${index}Z-abcdef`,
				workspaceId: body.workspaceId,
				casePath,
				timestamp: '2026-01-01T00:00:00Z',
				scriptText: body.scriptContent,
				status: body.scriptContent.includes('boom') ? 'FAILED' : 'SUCCEEDED',
				printOutputs: body.scriptContent.includes('boom') ? [] : [['d', 1.0]],
				outputLayers: body.scriptContent.includes('boom') ? [] : [['bright', 'outputs/bright.nii.gz']],
				log: body.scriptContent.includes('boom') ? 'typecheck: 1:1: error: nope\n' : 'save bright: 1.0 ms\n'
			}));
			this.runs.push(...records);
			return json(records);
		}
		if (method === 'GET' && segments[0] === 'workspaces' && segments[segments.length - 2] === 'layers') {
			return binary(gzNiftiFixture(2, 2, 2));
		}
		return notFound(`no route for ${method} ${path}`);
	}
}

function json(payload: unknown, status = 200): Response {
	return new Response(JSON.stringify(payload), {
		status,
		headers: { 'content-type': 'application/json' }
	});
}

function text(payload: string): Response {
	return new Response(payload, { status: 200, headers: { 'content-type': 'text/plain' } });
}

function binary(payload: Uint8Array): Response {
	return new Response(payload as BodyInit, {
		status: 200,
		headers: { 'content-type': 'application/gzip' }
	});
}

function notFound(message: string): Response {
	return new Response(JSON.stringify({ message }), { status: 404 });
}

function badRequest(message: string): Response {
	return new Response(JSON.stringify({ message }), { status: 400 });
}
