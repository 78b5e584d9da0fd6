import { defineConfig } from 'vite';

// The UI only talks to the documented API routes; in development each route
// prefix is proxied straight to the Python service.
const API = 'http://127.0.0.1:8080';

export default defineConfig({
	server: {
		port: 5173,
		proxy: {
			'/datasets': API,
			'/scripts': API,
			'/workspaces': API,
			'/run': API
		}
	},
	test: {
		environment: 'node',
		include: ['tests/**/*.test.ts']
	}
});
