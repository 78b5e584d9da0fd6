// Session view-model: workspace lifecycle and continuous state persistence.
//
// All other view-models read and mutate the workspace state through
// `updateState`, which schedules a debounced PUT (at most AUTOSAVE_DELAY_MS
// after the last change). A failed save raises a retry banner instead of
// losing work silently.

import { ApiRepository } from '../models/repository';
import { cloneState } from '../models/state';
import type { Workspace, WorkspaceState } from '../models/types';
import { Store } from './observable';

export const AUTOSAVE_DELAY_MS = 1500; // within the <= 2 s persistence budget

export class SessionViewModel {
	readonly workspaces = new Store<{ id: string; name: string }[] | null>(null);
	readonly current = new Store<Workspace | null>(null);
	readonly isLoading = new Store<boolean>(false);
	readonly error = new Store<string | null>(null);
	readonly saveError = new Store<string | null>(null);
	readonly isSaving = new Store<boolean>(false);

	private saveTimer: ReturnType<typeof setTimeout> | null = null;
	private pendingState: WorkspaceState | null = null;

	constructor(private readonly repo: ApiRepository) {}

	async loadWorkspaces(): Promise<void> {
		this.isLoading.set(true);
		this.error.set(null);
		try {
			this.workspaces.set(await this.repo.listWorkspaces());
		} catch (e) {
			this.error.set(e instanceof Error ? e.message : 'failed to list workspaces');
		} finally {
			this.isLoading.set(false);
		}
	}

	async createWorkspace(name: string, sourceId?: string): Promise<Workspace | null> {
		this.error.set(null);
		try {
			const workspace = await this.repo.createWorkspace(name, sourceId);
			this.current.set(workspace);
			await this.loadWorkspaces();
			return workspace;
		} catch (e) {
			this.error.set(e instanceof Error ? e.message : 'failed to create workspace');
			return null;
		}
	}

	async selectWorkspace(id: string): Promise<void> {
		this.isLoading.set(true);
		this.error.set(null);
		try {
			this.current.set(await this.repo.getWorkspace(id));
		} catch (e) {
			this.error.set(e instanceof Error ? e.message : 'failed to load workspace');
		} finally {
			this.isLoading.set(false);
		}
	}

	closeWorkspace(): void {
		this.flushNow();
		this.current.set(null);
	}

	get state(): WorkspaceState | null {
		return this.current.get()?.state ?? null;
	}

	/** Apply a mutation to the workspace state and schedule persistence. */
	updateState(mutate: (state: WorkspaceState) => void): void {
		const workspace = this.current.get();
		if (!workspace) return;
		const next = cloneState(workspace.state);
		mutate(next);
		this.current.set({ ...workspace, state: next });
		this.scheduleSave(next);
	}

	private scheduleSave(state: WorkspaceState): void {
		this.pendingState = state;
		if (this.saveTimer !== null) clearTimeout(this.saveTimer);
		this.saveTimer = setTimeout(() => void this.flush(), AUTOSAVE_DELAY_MS);
	}

	/** Persist any pending state immediately (used on close and retry). */
	flushNow(): void {
		if (this.saveTimer !== null) {
			clearTimeout(this.saveTimer);
			this.saveTimer = null;
		}
		void this.flush();
	}

	async retrySave(): Promise<void> {
		const workspace = this.current.get();
		if (workspace) this.pendingState = workspace.state;
		await this.flush();
	}

	private async flush(): Promise<void> {
		this.saveTimer = null;
		const workspace = this.current.get();
		const state = this.pendingState;
		if (!workspace || state === null) return;
		this.pendingState = null;
		this.isSaving.set(true);
		try {
			await this.repo.saveWorkspace(workspace.id, { state });
			this.saveError.set(null);
		} catch (e) {
			// Keep the unsaved state so "retry" can resend it.
			this.pendingState = state;
			this.saveError.set(e instanceof Error ? e.message : 'failed to save workspace');
		} finally {
			this.isSaving.set(false);
		}
	}
}
