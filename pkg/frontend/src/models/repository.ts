// Repository layer: the only place that talks to the server. Every method
// maps to exactly one documented route.

import type {
	Case,
	Dataset,
	ExampleScript,
	Layer,
	RunRecord,
	Workspace,
	WorkspaceState
} from './types';

export class RepositoryError extends Error {
	constructor(
		message: string,
		public readonly status: number | null = null,
		public readonly cause?: unknown
	) {
		super(message);
	}
}

export type FetchLike = typeof fetch;

export class ApiRepository {
	constructor(
		private readonly fetchImpl: FetchLike = fetch,
		private readonly base = ''
	) {}

	private async request(path: string, init?: RequestInit): Promise<Response> {
		let response: Response;
		try {
			response = await this.fetchImpl(this.base + path, init);
		} catch (cause) {
			throw new RepositoryError(`network error for ${path}`, null, cause);
		}
		if (!response.ok) {
			let message = `${init?.method ?? 'GET'} ${path} failed (${response.status})`;
			try {
				const body = (await response.json()) as { message?: string };
				if (body.message) message = body.message;
			} catch {
				// non-JSON error body; keep the generic message
			}
			throw new RepositoryError(message, response.status);
		}
		return response;
	}

	private async json<T>(path: string, init?: RequestInit): Promise<T> {
		const response = await this.request(path, init);
		try {
			return (await response.json()) as T;
		} catch (cause) {
			throw new RepositoryError(`invalid JSON from ${path}`, null, cause);
		}
	}

	// Datasets

	fetchDatasets(): Promise<Dataset[]> {
		return this.json('/datasets');
	}

	fetchCases(dataset: string): Promise<Case[]> {
		return this.json(`/datasets/${encodeURIComponent(dataset)}/cases`);
	}

	async fetchLayers(casePath: string): Promise<Layer[]> {
		const [dataset, caseName] = splitCasePath(casePath);
		return this.json(
			`/datasets/${encodeURIComponent(dataset)}/cases/${encodeURIComponent(caseName)}/layers`
		);
	}

	async fetchLayerBytes(casePath: string, layerName: string): Promise<ArrayBuffer> {
		const [dataset, caseName] = splitCasePath(casePath);
		const response = await this.request(
			`/datasets/${encodeURIComponent(dataset)}/cases/${encodeURIComponent(caseName)}` +
				`/layers/${encodeURIComponent(layerName)}`
		);
		return response.arrayBuffer();
	}

	// Scripts

	fetchExampleScripts(): Promise<ExampleScript[]> {
		return this.json('/scripts');
	}

	async fetchExampleScriptCode(scriptId: string): Promise<string> {
		const response = await this.request(`/scripts/${encodeURIComponent(scriptId)}`);
		return response.text();
	}

	// Workspaces

	listWorkspaces(): Promise<{ id: string; name: string }[]> {
		return this.json('/workspaces');
	}

	createWorkspace(name: string, sourceId?: string): Promise<Workspace> {
		return this.json('/workspaces', {
			method: 'POST',
			headers: { 'content-type': 'application/json' },
			body: JSON.stringify(sourceId ? { name, sourceId } : { name })
		});
	}

	getWorkspace(id: string): Promise<Workspace> {
		return this.json(`/workspaces/${encodeURIComponent(id)}`);
	}

	async saveWorkspace(id: string, payload: { name?: string; state?: WorkspaceState }): Promise<void> {
		await this.json(`/workspaces/${encodeURIComponent(id)}`, {
			method: 'PUT',
			headers: { 'content-type': 'application/json' },
			body: JSON.stringify(payload)
		});
	}

	async deleteWorkspace(id: string): Promise<void> {
		await this.json(`/workspaces/${encodeURIComponent(id)}`, { method: 'DELETE' });
	}

	fetchRuns(workspaceId: string): Promise<RunRecord[]> {
		return this.json(`/workspaces/${encodeURIComponent(workspaceId)}/runs`);
	}

	// Runs

	runScript(workspaceId: string, scriptContent: string, cases: string[]): Promise<RunRecord[]> {
		return this.json('/run', {
			method: 'POST',
			headers: { 'content-type': 'application/json' },
			body: JSON.stringify({ workspaceId, scriptContent, cases })
		});
	}

	async fetchRunOutputBytes(
		workspaceId: string,
		casePath: string,
		runId: string,
		label: string
	): Promise<ArrayBuffer> {
		const response = await this.request(
			`/workspaces/${encodeURIComponent(workspaceId)}/${encodeURIComponent(casePath)}` +
				`/${encodeURIComponent(runId)}/layers/${encodeURIComponent(label)}`
		);
		return response.arrayBuffer();
	}
}

function splitCasePath(casePath: string): [string, string] {
	const parts = casePath.split('/');
	if (parts.length !== 2 || !parts[0] || !parts[1]) {
		throw new RepositoryError(`malformed case path: ${casePath}`);
	}
	return [parts[0], parts[1]];
}
