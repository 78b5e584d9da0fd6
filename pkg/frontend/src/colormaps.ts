// Colormaps and slice compositing. Compositing is a pure function over typed
// arrays so it can be tested without a canvas; views copy the result into
// ImageData.

import type { Slice } from './models/volume';
import type { LayerStyle } from './models/types';

export type Rgb = [number, number, number];

const PRESETS: Record<string, (t: number) => Rgb> = {
	gray: (t) => [t * 255, t * 255, t * 255],
	cyan: (t) => [0, t * 255, t * 255],
	magenta: (t) => [t * 255, 0, t * 255],
	yellow: (t) => [t * 255, t * 255, 0],
	red: (t) => [t * 255, 0, 0],
	green: (t) => [0, t * 255, 0],
	blue: (t) => [0, 0, t * 255]
};

/** Resolve a colormap name; `custom:#rrggbb` scales the given color. */
export function colormapColor(name: string, t: number): Rgb {
	const clamped = Math.max(0, Math.min(1, t));
	if (name.startsWith('custom:')) {
		const rgb = parseHexColor(name.slice('custom:'.length));
		return [rgb[0] * clamped, rgb[1] * clamped, rgb[2] * clamped];
	}
	const preset = PRESETS[name] ?? PRESETS['gray']!;
	return preset(clamped);
}

export function parseHexColor(hex: string): Rgb {
	const clean = hex.startsWith('#') ? hex.slice(1) : hex;
	if (!/^[0-9a-fA-F]{6}$/.test(clean)) return [255, 255, 255];
	return [
		parseInt(clean.slice(0, 2), 16),
		parseInt(clean.slice(2, 4), 16),
		parseInt(clean.slice(4, 6), 16)
	];
}

export interface SliceLayer {
	slice: Slice;
	style: LayerStyle;
	range: [number, number]; // value range used for normalization
}

/**
 * Blend visible layers bottom-to-top over black, normal alpha compositing
 * with each layer's opacity. Returns RGBA bytes (width * height * 4).
 */
export function composeSliceRGBA(layers: SliceLayer[], width: number, height: number): Uint8ClampedArray {
	const out = new Uint8ClampedArray(width * height * 4);
	for (let p = 0; p < width * height; p++) out[p * 4 + 3] = 255;

	for (const { slice, style, range } of layers) {
		if (!style.visible || style.opacity <= 0) continue;
		const [lo, hi] = range;
		const span = hi - lo || 1;
		const alpha = Math.max(0, Math.min(1, style.opacity));
		for (let p = 0; p < width * height; p++) {
			const t = ((slice.values[p] ?? 0) - lo) / span;
			const [r, g, b] = colormapColor(style.colormap, t);
			out[p * 4] = (out[p * 4] ?? 0) * (1 - alpha) + r * alpha;
			out[p * 4 + 1] = (out[p * 4 + 1] ?? 0) * (1 - alpha) + g * alpha;
			out[p * 4 + 2] = (out[p * 4 + 2] ?? 0) * (1 - alpha) + b * alpha;
		}
	}
	return out;
}
