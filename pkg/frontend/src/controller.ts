import { SessionClient, type EEGSubmission, type Quadrant } from './api.js';
import { ConsoleViewState, type TrialRow } from './state.js';

/** Glue between the view state and the service.
 *
 * Every transition is confirmed by the service before the view state
 * moves (no optimistic UI): the console stays a pure mirror of the
 * session on the server.
 */
export class SessionController {
  readonly view = new ConsoleViewState();
  private sessionId: string | null = null;

  constructor(readonly client: SessionClient) {}

  get id(): string {
    if (this.sessionId === null) throw new Error('session not started');
    return this.sessionId;
  }

  async start(userId: string, phase = 'testing', seed = 0): Promise<void> {
    this.sessionId = await this.client.startSession(userId, phase, seed);
  }

  async designate(q: Quadrant): Promise<void> {
    await this.client.designate(this.id, q);
    this.view.setQuadrant(q);
  }

  async submitEEG(submission: EEGSubmission): Promise<void> {
    const out = await this.client.submitEEG(this.id, submission);
    this.view.eegCaptured(out.feature_dim);
  }

  async requestSong(): Promise<string> {
    const song = await this.client.nextSong(this.id);
    this.view.songArrived(song);
    return this.client.audioUrl(song.song_id);
  }

  /** Called by the audio element's `ended` event (or the test driver). */
  playbackEnded(): void {
    this.view.playbackFinished();
  }

  async report(valence: number, arousal: number): Promise<TrialRow> {
    this.view.setSliders(valence, arousal);
    if (!this.view.reportEnabled) {
      throw new Error('report is disabled until playback completes');
    }
    const out = await this.client.report(
      this.id,
      this.view.valenceSlider,
      this.view.arousalSlider
    );
    const row = this.view.reported(out.matched);
    await this.refreshStats();
    return row;
  }

  async refreshStats(): Promise<void> {
    this.view.statsUpdated(await this.client.stats(this.id));
  }
}
