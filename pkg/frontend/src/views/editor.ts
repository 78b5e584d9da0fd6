// Right panel: preset picker, highlighted script editor, run controls, and
// per-case results.

import { ScriptViewModel } from '../viewmodels/script';
import { SessionViewModel } from '../viewmodels/session';
import { append, clear, el } from './dom';

const KEYWORD_RE = /\b(load|let|save|print|import)\b/g;
const BUILTIN_RE = /\b(through|reachedBy|near|interior|dice|volume|tt|ff)\b/g;

export function highlightScript(source: string): string {
	const escaped = source
		.replace(/&/g, '&amp;')
		.replace(/</g, '&lt;')
		.replace(/>/g, '&gt;');
	return escaped
		.replace(/(\/\/[^\n]*)/g, '<span class="tok-comment">$1</span>')
		.replace(/("[^"\n]*")/g, '<span class="tok-string">$1</span>')
		.replace(KEYWORD_RE, '<span class="tok-keyword">$1</span>')
		.replace(BUILTIN_RE, '<span class="tok-builtin">$1</span>')
		.replace(/\b(-?\d+(?:\.\d+)?)\b/g, '<span class="tok-number">$1</span>');
}

export function mountEditor(
	root: HTMLElement,
	script: ScriptViewModel,
	session: SessionViewModel
): void {
	const container = el('div', { class: 'editor-panel' });
	root.append(container);

	const highlight = el('pre', { class: 'editor-highlight', 'aria-hidden': 'true' });
	const textarea = el('textarea', {
		class: 'editor-input',
		spellcheck: 'false',
		'aria-label': 'Script editor'
	});
	textarea.addEventListener('input', () => {
		script.setContent(textarea.value);
		highlight.innerHTML = highlightScript(textarea.value) + '\n';
	});
	textarea.addEventListener('scroll', () => {
		highlight.scrollTop = textarea.scrollTop;
		highlight.scrollLeft = textarea.scrollLeft;
	});

	const render = () => {
		clear(container);
		const content = script.content;
		if (textarea.value !== content) textarea.value = content;
		highlight.innerHTML = highlightScript(content) + '\n';

		const presetSelect = el('select', { 'aria-label': 'Example scripts' });
		presetSelect.append(el('option', { value: '' }, 'Load example…'));
		for (const preset of script.presets.get()) {
			presetSelect.append(el('option', { value: preset.id }, preset.name));
		}
		presetSelect.addEventListener('change', () => {
			if (presetSelect.value) void script.loadPreset(presetSelect.value);
		});

		const running = script.isRunning.get();
		const runButton = el(
			'button',
			{ class: 'primary run-button', onclick: () => void script.run() },
			running ? 'Running…' : 'Run on open cases'
		);
		if (running) runButton.setAttribute('disabled', '');

		const results = el('div', { class: 'run-results' });
		for (const [casePath, records] of script.resultsByCase()) {
			const section = el('div', { class: 'case-result' }, el('h4', {}, casePath));
			for (const record of records) {
				if (record.status === 'SUCCEEDED') {
					const table = el('table', { class: 'prints' });
					for (const [label, value] of record.printOutputs) {
						table.append(el('tr', {}, el('td', {}, label), el('td', {}, fmt(value))));
					}
					section.append(
						el('div', { class: 'result-ok' }, `✓ ${record.id}`),
						record.printOutputs.length > 0 ? table : el('p', { class: 'muted' }, 'No prints')
					);
				} else {
					section.append(
						el('div', { class: 'result-failed' }, `✗ ${record.id} failed`),
						el('pre', { class: 'run-log' }, record.log)
					);
				}
			}
			results.append(section);
		}

		append(container,
			el('div', { class: 'panel-title' }, 'Script'),
			presetSelect,
			script.error.get()
				? el('div', { class: 'error-inline', role: 'alert' }, script.error.get() ?? '')
				: null,
			el('div', { class: 'editor-wrap' }, highlight, textarea),
			runButton,
			results
		);
	};

	session.current.subscribe(render);
	script.presets.subscribe(render);
	script.isRunning.subscribe(render);
	script.lastResults.subscribe(render);
	script.error.subscribe(render);
}

function fmt(value: number): string {
	return Number.isInteger(value) ? String(value) : value.toFixed(6);
}
