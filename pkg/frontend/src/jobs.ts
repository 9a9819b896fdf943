/** Job submission form and status polling.
 *
 * Form fields map one-to-one onto the service's job config document.
 * Blank optional fields are omitted so the server applies its own
 * defaults. Status polling renders phases and counters exactly as
 * received.
 */

import type { ApiClient } from "./api.js";
import type { JobStatus } from "./types.js";

export interface JobFormOptions {
  pollIntervalMs?: number;
}

interface FieldSpec {
  name: string;
  label: string;
  required?: boolean;
  placeholder?: string;
}

const SOURCE_FIELDS: FieldSpec[] = [
  { name: "source.name", label: "source name", required: true },
  { name: "source.url_template", label: "url template ({date} per day)", required: true },
  { name: "source.date_from", label: "date from (YYYY-MM-DD)", required: true },
  { name: "source.date_to", label: "date to (YYYY-MM-DD)", required: true },
  { name: "source.time_interval_from", label: "time window start (HH:MM:SS)", placeholder: "whole day" },
  { name: "source.time_interval_to", label: "time window end (HH:MM:SS)", placeholder: "whole day" },
  { name: "source.cache_dir", label: "cache directory", placeholder: "cache" },
];

const JOB_FIELDS: FieldSpec[] = [
  { name: "gap_threshold_s", label: "gap threshold (s)", placeholder: "server default" },
  { name: "max_segment_duration_s", label: "max segment duration (s)", placeholder: "server default" },
  { name: "target_interval_s", label: "target interval (s)", placeholder: "vessel median" },
  { name: "v_max_kn", label: "max plausible speed (kn)", placeholder: "server default" },
  { name: "worker_count", label: "workers", placeholder: "1" },
  { name: "rule_config", label: "rule config path", placeholder: "built-in rules" },
  { name: "port_directory", label: "port directory path", placeholder: "bundled ports" },
];

const INT_FIELDS = new Set([
  "gap_threshold_s",
  "max_segment_duration_s",
  "target_interval_s",
  "worker_count",
]);

/** Read the form into a job config document, dropping blanks. */
export function configFromForm(form: HTMLFormElement): Record<string, unknown> {
  const value = (name: string): string => {
    const input = form.elements.namedItem(name) as HTMLInputElement | null;
    return input ? input.value.trim() : "";
  };

  const source: Record<string, unknown> = {
    name: value("source.name"),
    url_template: value("source.url_template"),
    date_from: value("source.date_from"),
    date_to: value("source.date_to"),
  };
  const cacheDir = value("source.cache_dir");
  if (cacheDir) source["cache_dir"] = cacheDir;
  const windowFrom = value("source.time_interval_from");
  const windowTo = value("source.time_interval_to");
  if (windowFrom && windowTo) source["time_interval"] = [windowFrom, windowTo];

  const config: Record<string, unknown> = { source };
  for (const field of JOB_FIELDS) {
    const raw = value(field.name);
    if (!raw) continue;
    if (field.name === "rule_config" || field.name === "port_directory") {
      config[field.name] = raw;
    } else if (INT_FIELDS.has(field.name)) {
      config[field.name] = parseInt(raw, 10);
    } else {
      config[field.name] = Number(raw);
    }
  }
  return config;
}

export class JobForm {
  readonly form: HTMLFormElement;
  private readonly statusPane: HTMLElement;
  private readonly pollIntervalMs: number;
  private phases: string[] = [];
  private lastStatus: JobStatus | null = null;

  constructor(
    container: HTMLElement,
    private readonly api: ApiClient,
    options: JobFormOptions = {},
  ) {
    this.pollIntervalMs = options.pollIntervalMs ?? 1000;
    this.form = document.createElement("form");
    this.form.className = "job-form";
    for (const field of [...SOURCE_FIELDS, ...JOB_FIELDS]) {
      this.form.append(this.fieldRow(field));
    }
    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "run job";
    this.form.append(submit);
    this.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });

    this.statusPane = document.createElement("div");
    this.statusPane.className = "job-status";
    container.append(this.form, this.statusPane);
  }

  /** Submit the config, then poll until the job settles. */
  async submit(): Promise<JobStatus | null> {
    this.phases = [];
    this.lastStatus = null;
    this.renderStatus();
    let jobId: string;
    try {
      const submitted = await this.api.submitJob(configFromForm(this.form));
      jobId = submitted.job_id;
    } catch (error) {
      this.statusPane.replaceChildren(errorLine(error));
      return null;
    }

    for (;;) {
      let status: JobStatus;
      try {
        status = await this.api.jobStatus(jobId);
      } catch (error) {
        this.statusPane.replaceChildren(errorLine(error));
        return null;
      }
      this.record(status);
      if (status.phase === "done" || status.phase === "failed") return status;
      await sleep(this.pollIntervalMs);
    }
  }

  private record(status: JobStatus): void {
    if (this.phases[this.phases.length - 1] !== status.phase) {
      this.phases.push(status.phase);
    }
    this.lastStatus = status;
    this.renderStatus();
  }

  private renderStatus(): void {
    this.statusPane.replaceChildren();
    if (this.lastStatus === null) return;

    const breadcrumb = document.createElement("ol");
    breadcrumb.className = "phase-breadcrumb";
    for (const phase of this.phases) {
      const item = document.createElement("li");
      item.className = `phase phase-${phase}`;
      item.textContent = phase;
      breadcrumb.append(item);
    }
    this.statusPane.append(breadcrumb);

    this.statusPane.append(
      countTable("counters", this.lastStatus.counters),
      countTable("dropped", this.lastStatus.dropped),
      countTable("timings (s)", this.lastStatus.timings_s),
    );

    if (this.lastStatus.fetch.length > 0) {
      const fetchList = document.createElement("ul");
      fetchList.className = "fetch-list";
      for (const entry of this.lastStatus.fetch) {
        const item = document.createElement("li");
        item.textContent = entry.detail
          ? `${entry.date}: ${entry.status} (${entry.detail})`
          : `${entry.date}: ${entry.status}`;
        fetchList.append(item);
      }
      this.statusPane.append(fetchList);
    }

    if (this.lastStatus.error !== null) {
      const error = document.createElement("p");
      error.className = "job-error";
      error.textContent = this.lastStatus.error;
      this.statusPane.append(error);
    }
  }

  private fieldRow(spec: FieldSpec): HTMLElement {
    const row = document.createElement("label");
    row.className = "field-row";
    const caption = document.createElement("span");
    caption.textContent = spec.label;
    const input = document.createElement("input");
    input.name = spec.name;
    input.required = spec.required ?? false;
    if (spec.placeholder) input.placeholder = spec.placeholder;
    row.append(caption, input);
    return row;
  }
}

function countTable(title: string, entries: Record<string, number>): HTMLElement {
  const wrapper = document.createElement("div");
  wrapper.className = "count-table";
  const heading = document.createElement("h4");
  heading.textContent = title;
  wrapper.append(heading);
  const list = document.createElement("dl");
  for (const [key, count] of Object.entries(entries)) {
    const term = document.createElement("dt");
    term.textContent = key;
    const detail = document.createElement("dd");
    detail.setAttribute("data-counter", key);
    detail.textContent = String(count);
    list.append(term, detail);
  }
  wrapper.append(list);
  return wrapper;
}

function errorLine(error: unknown): HTMLElement {
  const p = document.createElement("p");
  p.className = "job-error";
  p.textContent = error instanceof Error ? error.message : String(error);
  return p;
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
