import './styles.css';
import { ApiRepository } from './models/repository';
import { mountApp } from './views/app';

const root = document.getElementById('app');
if (root) {
	mountApp(root, new ApiRepository());
}
