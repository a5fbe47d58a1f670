// Visit detail panel: date, note types, probability, and findings with the
// matched surface text highlighted inside its context snippet.

import type { VisitSummary } from './api.js';
import { highlightSegments } from './highlight.js';

export function renderPanelLoading(panel: HTMLElement, date: string): void {
  panel.textContent = '';
  const note = document.createElement('p');
  note.className = 'empty-note';
  note.textContent = `loading visit ${date}...`;
  panel.appendChild(note);
}

export function renderPanelError(panel: HTMLElement, message: string): void {
  panel.textContent = '';
  const error = document.createElement('p');
  error.className = 'error-note';
  error.setAttribute('data-error', 'summary-fetch');
  error.textContent = `could not load the visit summary: ${message}`;
  panel.appendChild(error);
}

export function renderPanel(panel: HTMLElement, summary: VisitSummary): void {
  panel.textContent = '';

  const header = document.createElement('div');
  header.className = 'panel-header';

  const date = document.createElement('h3');
  date.className = 'panel-date';
  date.textContent = summary.date;
  header.appendChild(date);

  const types = document.createElement('span');
  types.className = 'panel-note-types';
  types.textContent = summary.note_types.join(', ');
  header.appendChild(types);

  const prob = document.createElement('span');
  prob.className = 'panel-probability';
  prob.setAttribute('data-probability', String(summary.probability));
  prob.textContent = `survival > 90d: ${(summary.probability * 100).toFixed(1)}%`;
  header.appendChild(prob);

  panel.appendChild(header);

  if (summary.findings.length === 0) {
    const none = document.createElement('p');
    none.className = 'empty-note';
    none.textContent = 'no controlled terms found in this visit';
    panel.appendChild(none);
    return;
  }

  const list = document.createElement('ul');
  list.className = 'findings';
  for (const finding of summary.findings) {
    const item = document.createElement('li');
    item.className = 'finding';

    const concept = document.createElement('span');
    concept.className = 'concept-id';
    concept.textContent = finding.concept_id;
    item.appendChild(concept);

    const note = document.createElement('span');
    note.className = 'note-badge';
    note.textContent = finding.note_id;
    item.appendChild(note);

    const context = document.createElement('span');
    context.className = 'context';
    for (const segment of highlightSegments(finding.context, finding.surface_text)) {
      if (segment.highlighted) {
        const mark = document.createElement('mark');
        mark.className = 'surface-highlight';
        mark.title = finding.concept_id;
        mark.textContent = segment.text;
        context.appendChild(mark);
      } else {
        context.appendChild(document.createTextNode(segment.text));
      }
    }
    item.appendChild(context);
    list.appendChild(item);
  }
  panel.appendChild(list);
}
