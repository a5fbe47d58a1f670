import { bootstrap } from './app.js';

const app = bootstrap();
void app.init();
