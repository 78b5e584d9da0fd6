// Minimal observable store: the reactive backbone of the view-model layer.

export type Unsubscribe = () => void;

export class Store<T> {
	private listeners = new Set<(value: T) => void>();

	constructor(private value: T) {}

	get(): T {
		return this.value;
	}

	set(next: T): void {
		this.value = next;
		for (const listener of [...this.listeners]) listener(next);
	}

	update(fn: (value: T) => T): void {
		this.set(fn(this.value));
	}

	/** Subscribe and receive the current value immediately. */
	subscribe(listener: (value: T) => void): Unsubscribe {
		this.listeners.add(listener);
		listener(this.value);
		return () => this.listeners.delete(listener);
	}
}
