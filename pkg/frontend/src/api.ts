import { z } from 'zod';

export const QUADRANTS = ['Q1', 'Q2', 'Q3', 'Q4'] as const;
export type Quadrant = (typeof QUADRANTS)[number];

const StartResponse = z.object({ session_id: z.string() });

const EEGResponse = z.object({ ok: z.boolean(), feature_dim: z.number().int() });

const NextSongResponse = z.object({
  song_id: z.string(),
  audio_url: z.string(),
  iteration_count: z.number().int().min(1),
  matched: z.boolean(),
});
export type NextSong = z.infer<typeof NextSongResponse>;

const ReportResponse = z.object({
  matched: z.boolean(),
  trial_count: z.number().int(),
});
export type ReportResult = z.infer<typeof ReportResponse>;

const StatsResponse = z.object({
  trial_count: z.number().int(),
  match_rate: z.number().nullable(),
  t_valence: z.number().nullable(),
  t_arousal: z.number().nullable(),
});
export type Stats = z.infer<typeof StatsResponse>;

export interface EEGWindow {
  channels: string[];
  samples: number[][]; // channel-major
  window_length: number;
}

export interface EEGReplay {
  replay_path: string; // server-side CSV reference
  window_length?: number;
}

export type EEGSubmission = EEGWindow | EEGReplay;

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string
  ) {
    super(`service ${status}: ${detail}`);
  }
}

/** Thin typed client for the session HTTP API; no business rules here. */
export class SessionClient {
  constructor(
    readonly baseUrl: string,
    readonly fetchImpl: typeof fetch = fetch
  ) {}

  private async call<T>(
    method: 'GET' | 'POST',
    path: string,
    schema: z.ZodType<T>,
    body?: unknown
  ): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await res.text();
    if (!res.ok) {
      let detail = text;
      try {
        detail = String(JSON.parse(text).detail ?? text);
      } catch {
        /* non-JSON error body */
      }
      throw new ServiceError(res.status, detail);
    }
    return schema.parse(JSON.parse(text));
  }

  async startSession(userId: string, phase = 'testing', seed = 0): Promise<string> {
    const out = await this.call('POST', '/session/start', StartResponse, {
      user_id: userId,
      phase,
      seed,
    });
    return out.session_id;
  }

  designate(sessionId: string, quadrant: Quadrant) {
    return this.call('POST', `/session/${sessionId}/designate`, z.object({ ok: z.boolean() }), {
      quadrant,
    });
  }

  submitEEG(sessionId: string, submission: EEGSubmission) {
    return this.call('POST', `/session/${sessionId}/eeg`, EEGResponse, submission);
  }

  nextSong(sessionId: string): Promise<NextSong> {
    return this.call('POST', `/session/${sessionId}/next-song`, NextSongResponse);
  }

  report(sessionId: string, valence: number, arousal: number): Promise<ReportResult> {
    return this.call('POST', `/session/${sessionId}/report`, ReportResponse, {
      valence,
      arousal,
    });
  }

  stats(sessionId: string): Promise<Stats> {
    return this.call('GET', `/stats?session_id=${sessionId}`, StatsResponse);
  }

  audioUrl(songId: string): string {
    return `${this.baseUrl}/audio/${songId}`;
  }
}
