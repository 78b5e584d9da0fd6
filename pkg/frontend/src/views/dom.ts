// Tiny DOM helper used by all views.

export function el<K extends keyof HTMLElementTagNameMap>(
	tag: K,
	attrs: Record<string, string | boolean | ((event: Event) => void)> = {},
	...children: (Node | string | null)[]
): HTMLElementTagNameMap[K] {
	const node = document.createElement(tag);
	for (const [key, value] of Object.entries(attrs)) {
		if (typeof value === 'function') {
			node.addEventListener(key.replace(/^on/, ''), value);
		} else if (typeof value === 'boolean') {
			if (value) node.setAttribute(key, '');
		} else {
			node.setAttribute(key, value);
		}
	}
	for (const child of children) {
		if (child === null) continue;
		node.append(child instanceof Node ? child : document.createTextNode(child));
	}
	return node;
}

export function clear(node: HTMLElement): void {
	while (node.firstChild) node.removeChild(node.firstChild);
}

/** Append children, skipping nulls (unlike the DOM's own append). */
export function append(node: HTMLElement, ...children: (Node | string | null)[]): void {
	for (const child of children) {
		if (child !== null) node.append(child);
	}
}
