// Per-case viewer view-model: differential volume loading and the shared
// crosshair across a case's three orthogonal views.

import type { Volume } from '../models/volume';
import { Store } from './observable';

export interface Crosshair {
	x: number;
	y: number;
	z: number;
}

export type VolumeFetcher = (key: string) => Promise<Volume>;

export class ViewerViewModel {
	readonly crosshair = new Store<Crosshair>({ x: 0, y: 0, z: 0 });
	readonly volumes = new Store<Map<string, Volume>>(new Map());
	readonly error = new Store<string | null>(null);
	/** Keys fetched over this viewer's lifetime; used to prove differential loading. */
	fetchCount = 0;

	constructor(private readonly fetcher: VolumeFetcher) {}

	/**
	 * Differential update: fetch only keys not yet loaded, drop only keys no
	 * longer wanted. Already-loaded volumes are never re-fetched.
	 */
	async syncLayers(wantedKeys: string[]): Promise<void> {
		const current = this.volumes.get();
		const wanted = new Set(wantedKeys);
		const next = new Map<string, Volume>();
		for (const [key, volume] of current) {
			if (wanted.has(key)) next.set(key, volume);
		}
		const toFetch = wantedKeys.filter((key) => !current.has(key));
		const dropped = next.size !== current.size;
		for (const key of toFetch) {
			try {
				this.fetchCount += 1;
				const volume = await this.fetcher(key);
				next.set(key, volume);
				this.error.set(null);
				if (this.volumes.get().size === 0 && next.size === 1) {
					this.centerCrosshair(volume);
				}
			} catch (e) {
				this.error.set(e instanceof Error ? e.message : `failed to load ${key}`);
			}
		}
		// Publish only real changes; unconditional sets would re-trigger any
		// subscriber that itself calls syncLayers.
		if (toFetch.length > 0 || dropped) {
			this.volumes.set(next);
		}
	}

	private centerCrosshair(volume: Volume): void {
		const [nx, ny, nz] = volume.dims;
		this.crosshair.set({
			x: Math.floor(nx / 2),
			y: Math.floor(ny / 2),
			z: Math.floor(nz / 2)
		});
	}

	/** First loaded volume fixes the geometry the viewers render in. */
	referenceVolume(): Volume | null {
		const first = this.volumes.get().values().next();
		return first.done ? null : first.value;
	}

	setCrosshair(patch: Partial<Crosshair>): void {
		const reference = this.referenceVolume();
		const next = { ...this.crosshair.get(), ...patch };
		if (reference) {
			const [nx, ny, nz] = reference.dims;
			next.x = clamp(next.x, nx - 1);
			next.y = clamp(next.y, ny - 1);
			next.z = clamp(next.z, nz - 1);
		}
		this.crosshair.set(next);
	}
}

function clamp(value: number, max: number): number {
	return Math.max(0, Math.min(max, Math.round(value)));
}
