// Application wiring: patient list, curve view, detail panel, hash routing,
// and fetch-cancellation. All displayed data comes from the API; the client
// performs no prognostic computation of its own.

import { ApiClient, type Curve, type PatientEntry } from './api.js';
import { renderCurve } from './curve.js';
import { renderPanel, renderPanelError, renderPanelLoading } from './panel.js';

export type AppElements = {
  patientList: HTMLElement;
  curve: HTMLElement;
  panel: HTMLElement;
  banner: HTMLElement;
  meta: HTMLElement;
};

export type RouteState = {
  patientId: string | null;
  date: string | null;
};

export function parseRoute(hash: string): RouteState {
  const match = /^#\/patients\/([^/?]+)(?:\?(.*))?$/.exec(hash);
  if (!match) return { patientId: null, date: null };
  const params = new URLSearchParams(match[2] ?? '');
  return { patientId: decodeURIComponent(match[1]), date: params.get('date') };
}

export function formatRoute(patientId: string, date: string | null): string {
  const base = `#/patients/${encodeURIComponent(patientId)}`;
  return date ? `${base}?date=${encodeURIComponent(date)}` : base;
}

export class App {
  private api: ApiClient;
  private patients: PatientEntry[] = [];
  private currentCurve: Curve | null = null;
  private selectedPatient: string | null = null;
  private selectedIndex: number | null = null;
  private summaryAbort: AbortController | null = null;
  private onHashChange = (): void => {
    void this.applyRoute(parseRoute(window.location.hash));
  };
  curveFetchCount = 0; // instrumentation used by tests

  constructor(private elements: AppElements, apiBase = '') {
    this.api = new ApiClient(apiBase);
  }

  async init(): Promise<void> {
    window.addEventListener('hashchange', this.onHashChange);
    await this.loadPatients();
    await this.applyRoute(parseRoute(window.location.hash));
  }

  destroy(): void {
    window.removeEventListener('hashchange', this.onHashChange);
    this.summaryAbort?.abort();
  }

  private showBanner(message: string, retry: () => void): void {
    const banner = this.elements.banner;
    banner.textContent = '';
    banner.classList.add('visible');
    const text = document.createElement('span');
    text.textContent = message;
    banner.appendChild(text);
    const button = document.createElement('button');
    button.textContent = 'retry';
    button.addEventListener('click', () => {
      banner.classList.remove('visible');
      banner.textContent = '';
      retry();
    });
    banner.appendChild(button);
  }

  async loadPatients(): Promise<void> {
    try {
      this.patients = await this.api.fetchPatients();
      this.renderPatientList();
      void this.api.fetchMeta().then((meta) => {
        this.elements.meta.textContent =
          `${meta.n_patients} patients - model ${meta.config_digest} - v${meta.package_version}`;
      }).catch(() => undefined);
    } catch (error) {
      this.showBanner(
        `could not reach the service: ${(error as Error).message}`,
        () => void this.loadPatients(),
      );
    }
  }

  private renderPatientList(): void {
    const list = this.elements.patientList;
    list.textContent = '';
    if (this.patients.length === 0) {
      const empty = document.createElement('p');
      empty.className = 'empty-note';
      empty.textContent = 'no patients in the served cohort';
      list.appendChild(empty);
      return;
    }
    const ul = document.createElement('ul');
    for (const patient of this.patients) {
      const li = document.createElement('li');
      const button = document.createElement('button');
      button.className = 'patient-button';
      button.setAttribute('data-patient-id', patient.patient_id);
      if (patient.patient_id === this.selectedPatient) button.classList.add('selected');
      button.textContent =
        `${patient.patient_id} (${patient.n_visits} visits, ${patient.outcome_kind})`;
      button.addEventListener('click', () => {
        window.location.hash = formatRoute(patient.patient_id, null);
      });
      li.appendChild(button);
      ul.appendChild(li);
    }
    list.appendChild(ul);
  }

  async applyRoute(route: RouteState): Promise<void> {
    if (!route.patientId) return;
    if (route.patientId !== this.selectedPatient || !this.currentCurve) {
      await this.selectPatient(route.patientId);
    }
    if (route.date && this.currentCurve) {
      const index = this.currentCurve.points.findIndex((p) => p.date === route.date);
      if (index >= 0) await this.selectPoint(index, { updateHash: false });
    }
  }

  async selectPatient(patientId: string): Promise<void> {
    this.selectedPatient = patientId;
    this.selectedIndex = null;
    this.elements.panel.textContent = '';
    this.renderPatientList();
    try {
      this.curveFetchCount += 1;
      this.currentCurve = await this.api.fetchCurve(patientId);
    } catch (error) {
      this.currentCurve = null;
      this.showBanner(
        `could not load the curve for ${patientId}: ${(error as Error).message}`,
        () => void this.selectPatient(patientId),
      );
      return;
    }
    this.renderCurveView();
  }

  private renderCurveView(): void {
    if (!this.currentCurve) return;
    renderCurve(this.elements.curve, this.currentCurve, this.selectedIndex, {
      onSelectPoint: (index) => void this.selectPoint(index, { updateHash: true }),
    });
  }

  async selectPoint(index: number, options: { updateHash: boolean }): Promise<void> {
    if (!this.currentCurve || !this.selectedPatient) return;
    const point = this.currentCurve.points[index];
    if (!point) return;
    this.selectedIndex = index;
    this.renderCurveView();
    if (options.updateHash) {
      const route = formatRoute(this.selectedPatient, point.date);
      if (window.location.hash !== route) {
        // replace instead of push so marker-to-marker clicks do not pile up history
        window.history.replaceState(null, '', route);
      }
    }

    // newer clicks cancel any in-flight summary fetch
    this.summaryAbort?.abort();
    const abort = new AbortController();
    this.summaryAbort = abort;
    renderPanelLoading(this.elements.panel, point.date);
    try {
      const summary = await this.api.fetchSummary(this.selectedPatient, point.date, abort.signal);
      if (abort.signal.aborted) return;
      renderPanel(this.elements.panel, summary);
    } catch (error) {
      if (abort.signal.aborted) return;
      renderPanelError(this.elements.panel, (error as Error).message);
    }
  }
}

export function bootstrap(root: Document = document): App {
  const elements: AppElements = {
    patientList: root.getElementById('patient-list') as HTMLElement,
    curve: root.getElementById('curve') as HTMLElement,
    panel: root.getElementById('panel') as HTMLElement,
    banner: root.getElementById('error-banner') as HTMLElement,
    meta: root.getElementById('meta') as HTMLElement,
  };
  const apiBase = (root.body.dataset.apiBase ?? '').replace(/\/$/, '');
  return new App(elements, apiBase);
}
