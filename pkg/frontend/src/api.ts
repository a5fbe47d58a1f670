// Typed client for the read-only prognote JSON API.

export type PatientEntry = {
  patient_id: string;
  n_visits: number;
  outcome_kind: 'death' | 'censored';
};

export type CurvePoint = {
  date: string; // YYYY-MM-DD
  probability: number;
  note_types: string[];
};

export type Curve = {
  patient_id: string;
  points: CurvePoint[];
};

export type Finding = {
  concept_id: string;
  surface_text: string;
  context: string;
  span: [number, number];
  note_id: string;
};

export type VisitSummary = {
  date: string;
  note_types: string[];
  probability: number;
  findings: Finding[];
};

export type Meta = {
  package_version: string;
  config_digest: string;
  n_patients: number;
};

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function getJson<T>(url: string, signal?: AbortSignal): Promise<T> {
  const res = await fetch(url, { headers: { Accept: 'application/json' }, signal });
  if (!res.ok) {
    let detail = `HTTP ${res.status}`;
    try {
      const body = (await res.json()) as { error?: string };
      if (body.error) detail = body.error;
    } catch {
      // non-JSON error body; keep the status line
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class ApiClient {
  constructor(private baseUrl: string = '') {}

  fetchPatients(signal?: AbortSignal): Promise<PatientEntry[]> {
    return getJson(`${this.baseUrl}/api/patients`, signal);
  }

  fetchCurve(patientId: string, signal?: AbortSignal): Promise<Curve> {
    return getJson(`${this.baseUrl}/api/patients/${encodeURIComponent(patientId)}/curve`, signal);
  }

  fetchSummary(patientId: string, date: string, signal?: AbortSignal): Promise<VisitSummary> {
    const pid = encodeURIComponent(patientId);
    return getJson(`${this.baseUrl}/api/patients/${pid}/visits/${encodeURIComponent(date)}/summary`, signal);
  }

  fetchMeta(signal?: AbortSignal): Promise<Meta> {
    return getJson(`${this.baseUrl}/api/meta`, signal);
  }
}
