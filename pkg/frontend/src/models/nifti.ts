// NIfTI-1 decoding for the subset the service emits/serves: 3-D scalar
// volumes in uint8 / int16 / float32, optionally gzip-wrapped. Applies the
// scl_slope/scl_inter scaling so the viewer works in scaled values.

import type { Volume } from './volume';

const HEADER_SIZE = 348;

export class NiftiParseError extends Error {}

export async function decodeNifti(buffer: ArrayBuffer): Promise<Volume> {
	let bytes: Uint8Array = new Uint8Array(buffer);
	if (bytes.length >= 2 && bytes[0] === 0x1f && bytes[1] === 0x8b) {
		bytes = await gunzip(bytes);
	}
	return parseNifti(bytes);
}

async function gunzip(bytes: Uint8Array): Promise<Uint8Array> {
	const stream = new Blob([bytes as BlobPart])
		.stream()
		.pipeThrough(new DecompressionStream('gzip'));
	const out = await new Response(stream).arrayBuffer();
	return new Uint8Array(out);
}

export function parseNifti(bytes: Uint8Array): Volume {
	if (bytes.length < HEADER_SIZE) {
		throw new NiftiParseError(`file too short for a header: ${bytes.length} bytes`);
	}
	const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
	let little = true;
	if (view.getInt32(0, true) !== HEADER_SIZE) {
		if (view.getInt32(0, false) !== HEADER_SIZE) {
			throw new NiftiParseError('bad sizeof_hdr; not a NIfTI-1 file');
		}
		little = false;
	}
	const magic = String.fromCharCode(bytes[344] ?? 0, bytes[345] ?? 0, bytes[346] ?? 0);
	if (magic !== 'n+1' || bytes[347] !== 0) {
		throw new NiftiParseError(`bad magic ${magic}`);
	}

	const ndim = view.getInt16(40, little);
	if (ndim < 1 || ndim > 7) throw new NiftiParseError(`implausible dim[0] = ${ndim}`);
	for (let d = 4; d <= ndim; d++) {
		if (view.getInt16(40 + 2 * d, little) > 1) throw new NiftiParseError('4D not supported');
	}
	const dim = (i: number) => (i <= ndim ? Math.max(1, view.getInt16(40 + 2 * i, little)) : 1);
	const dims: [number, number, number] = [dim(1), dim(2), dim(3)];
	const pix = (i: number) => {
		const value = view.getFloat32(76 + 4 * i, little);
		return i <= ndim && value > 0 ? value : 1.0;
	};
	const spacing: [number, number, number] = [pix(1), pix(2), pix(3)];

	const datatype = view.getInt16(70, little);
	const voxOffsetRaw = view.getFloat32(108, little);
	const offset = voxOffsetRaw >= HEADER_SIZE ? Math.floor(voxOffsetRaw) : 352;
	let slope = view.getFloat32(112, little);
	let inter = view.getFloat32(116, little);
	if (!isFinite(slope)) slope = 0;
	if (!isFinite(inter)) inter = 0;

	const count = dims[0] * dims[1] * dims[2];
	const itemSize = datatype === 2 ? 1 : datatype === 4 ? 2 : datatype === 16 ? 4 : 0;
	if (itemSize === 0) throw new NiftiParseError(`unsupported datatype code ${datatype}`);
	if (bytes.length < offset + count * itemSize) {
		throw new NiftiParseError('truncated payload');
	}

	const data = new Float32Array(count);
	for (let i = 0; i < count; i++) {
		const at = offset + i * itemSize;
		let raw: number;
		if (datatype === 2) raw = view.getUint8(at);
		else if (datatype === 4) raw = view.getInt16(at, little);
		else raw = view.getFloat32(at, little);
		data[i] = slope !== 0 ? raw * slope + inter : raw;
	}
	return { dims, spacing, data };
}
