import { ApiClient } from './api.js';
import { App } from './app.js';

const host = document.getElementById('app');
if (host) {
  const app = new App(new ApiClient(''), host);
  app.init().catch((e) => {
    host.textContent = `failed to load audit report: ${e}`;
  });
}
