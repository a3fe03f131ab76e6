/** Browser entry point: ?service=http://host:port&test=default&student=key */
import { ServiceClient } from './api.js';
import { TestController } from './state.js';
import { mountApp, startApp } from './app.js';

const params = new URLSearchParams(window.location.search);
const service = params.get('service') ?? 'http://127.0.0.1:8000';
const testId = params.get('test') ?? 'default';
const studentKey = params.get('student') ?? `anon-${Date.now()}`;

const root = document.getElementById('app');
if (root === null) {
  throw new Error('missing #app element');
}
const handles = mountApp(root, new TestController(new ServiceClient(service)));
void startApp(handles, testId, studentKey);
