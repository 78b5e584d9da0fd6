// Decoded volumes and 2-D slice extraction.
//
// Voxel data is linearized x-fastest: index = x + nx * (y + ny * z). Slices
// are extracted row-major with (i, j) = (column, row) so that a canvas pixel
// (i, j) shows exactly the voxel the plane geometry dictates.

export type Plane = 'axial' | 'sagittal' | 'coronal';

export interface Volume {
	dims: [number, number, number]; // (nx, ny, nz)
	spacing: [number, number, number];
	data: Float32Array; // scaled values, length nx*ny*nz
}

export interface Slice {
	width: number;
	height: number;
	values: Float32Array; // row-major, length width*height
}

export function voxelValue(volume: Volume, x: number, y: number, z: number): number {
	const [nx, ny] = volume.dims;
	return volume.data[x + nx * (y + ny * z)] ?? 0;
}

/** Number of slices available along a plane's scroll axis. */
export function sliceCount(volume: Volume, plane: Plane): number {
	const [nx, ny, nz] = volume.dims;
	if (plane === 'axial') return nz;
	if (plane === 'sagittal') return nx;
	return ny;
}

/**
 * Extract one orthogonal slice.
 *
 * axial (k = z): width nx, height ny, pixel (i, j) = voxel (i, j, k)
 * sagittal (k = x): width ny, height nz, pixel (i, j) = voxel (k, i, j)
 * coronal (k = y): width nx, height nz, pixel (i, j) = voxel (i, k, j)
 */
export function extractSlice(volume: Volume, plane: Plane, k: number): Slice {
	const [nx, ny, nz] = volume.dims;
	if (plane === 'axial') {
		const values = new Float32Array(nx * ny);
		for (let j = 0; j < ny; j++) {
			for (let i = 0; i < nx; i++) {
				values[j * nx + i] = voxelValue(volume, i, j, k);
			}
		}
		return { width: nx, height: ny, values };
	}
	if (plane === 'sagittal') {
		const values = new Float32Array(ny * nz);
		for (let j = 0; j < nz; j++) {
			for (let i = 0; i < ny; i++) {
				values[j * ny + i] = voxelValue(volume, k, i, j);
			}
		}
		return { width: ny, height: nz, values };
	}
	const values = new Float32Array(nx * nz);
	for (let j = 0; j < nz; j++) {
		for (let i = 0; i < nx; i++) {
			values[j * nx + i] = voxelValue(volume, i, k, j);
		}
	}
	return { width: nx, height: nz, values };
}

export function valueRange(volume: Volume): [number, number] {
	let lo = Infinity;
	let hi = -Infinity;
	for (const v of volume.data) {
		if (v < lo) lo = v;
		if (v > hi) hi = v;
	}
	if (!isFinite(lo)) return [0, 1];
	return lo === hi ? [lo, lo + 1] : [lo, hi];
}
