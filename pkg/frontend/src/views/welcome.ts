// Welcome screen: pick an existing workspace, create a fresh one, or clone.

import { SessionViewModel } from '../viewmodels/session';
import { append, clear, el } from './dom';

export function mountWelcome(root: HTMLElement, session: SessionViewModel): void {
	const container = el('div', { class: 'welcome' });
	root.append(container);

	const render = () => {
		clear(container);
		const workspaces = session.workspaces.get();
		const error = session.error.get();

		const nameInput = el('input', {
			type: 'text',
			placeholder: 'Workspace name',
			'aria-label': 'Workspace name'
		});
		const createButton = el(
			'button',
			{
				class: 'primary',
				onclick: () => {
					const name = nameInput.value.trim();
					if (name) void session.createWorkspace(name);
				}
			},
			'Create workspace'
		);

		const list = el('ul', { class: 'workspace-list' });
		for (const workspace of workspaces ?? []) {
			list.append(
				el(
					'li',
					{},
					el(
						'button',
						{ class: 'link', onclick: () => void session.selectWorkspace(workspace.id) },
						`${workspace.name} `,
						el('span', { class: 'muted' }, `(${workspace.id})`)
					),
					el(
						'button',
						{
							class: 'small',
							title: 'Clone this workspace',
							onclick: () => {
								const name = prompt('Name for the clone?', `${workspace.name} copy`);
								if (name) void session.createWorkspace(name, workspace.id);
							}
						},
						'Clone'
					)
				)
			);
		}

		append(container,
			el('h1', {}, 'voxlab'),
			el('p', {}, 'Create a workspace or load an existing one to start analyzing.'),
			error ? el('div', { class: 'error-banner', role: 'alert' }, error) : null,
			el('div', { class: 'welcome-create' }, nameInput, createButton),
			workspaces === null
				? el('p', { class: 'muted' }, 'Loading workspaces…')
				: workspaces.length === 0
					? el('p', { class: 'muted' }, 'No workspaces yet.')
					: list
		);
	};

	session.workspaces.subscribe(render);
	session.error.subscribe(render);
}
