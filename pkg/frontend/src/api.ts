/**
 * Typed client for the emulator service.
 *
 * The UI is a pure client: every number it renders comes from one of
 * these responses, captured in application state.
 */

export interface DistributionPayload {
  assumption: string;
  support: number[];
  probability: number[];
  label: string;
}

export interface AlterationPayload {
  assumption: string;
  F: DistributionPayload;
  P: DistributionPayload;
}

export interface EmulationRow {
  tau: number;
  scc_observed: number;
  scc_emulated: number;
  shift: number;
  se: number;
  ci_low: number;
  ci_high: number;
  ci_level: number;
}

export interface EmulateResponse {
  schema: string;
  results: EmulationRow[];
  warnings: string[];
}

export interface CombineInputRow {
  label: string;
  mu: number;
  sigma: number;
}

export interface CombineRow {
  tau: number;
  mu_combined: number;
  sigma_combined: number;
  inputs: CombineInputRow[];
}

export interface CombineResponse {
  schema: string;
  results: CombineRow[];
}

export interface PresetsResponse {
  schema: string;
  presets: DistributionPayload[];
}

/** Non-2xx response; body is kept verbatim so the UI can surface it. */
export class ApiError extends Error {
  constructor(readonly status: number, readonly body: unknown) {
    super(`service returned ${status}: ${JSON.stringify(body)}`);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, String(err));
    }
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      throw new ApiError(response.status, body);
    }
    return body as T;
  }

  getPresets(): Promise<PresetsResponse> {
    return this.request("/presets");
  }

  getModel(): Promise<unknown> {
    return this.request("/model");
  }

  postEmulate(
    alterations: AlterationPayload[],
    ciLevel = 0.95,
  ): Promise<EmulateResponse> {
    return this.request("/emulate", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ alterations, ci_level: ciLevel }),
    });
  }

  postCombine(
    inputs: { label: string; results: EmulationRow[] }[],
  ): Promise<CombineResponse> {
    return this.request("/combine", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ inputs }),
    });
  }
}
