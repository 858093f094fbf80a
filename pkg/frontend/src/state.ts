import type { NextSong, Quadrant, Stats } from './api.js';

export const SLIDER_MIN = -5;
export const SLIDER_MAX = 5;

export type Step = 'designate' | 'capture' | 'request' | 'play' | 'report';

export interface TrialRow {
  songId: string;
  designated: Quadrant;
  valence: number;
  arousal: number;
  matched: boolean;
}

export interface StatsPanel {
  trialCount: number;
  matchRate: string; // formatted for display
  tValence: string;
  tArousal: string;
}

export const formatRate = (x: number | null): string =>
  x === null ? 'n/a' : x.toFixed(3);

/** View state for one session tab.
 *
 * Holds no business rules beyond UI affordances: which step is next,
 * whether the report button is enabled (playback must finish first),
 * and the slider values, which snap back to 0 after every submission.
 */
export class ConsoleViewState {
  step: Step = 'designate';
  designated: Quadrant | null = null;
  nowPlaying: NextSong | null = null;
  playbackDone = false;
  valenceSlider = 0; // horizontal bar
  arousalSlider = 0; // vertical bar
  history: TrialRow[] = [];
  statsPanel: StatsPanel = {
    trialCount: 0,
    matchRate: 'n/a',
    tValence: 'n/a',
    tArousal: 'n/a',
  };
  lastError: string | null = null;

  setQuadrant(q: Quadrant): void {
    if (this.step !== 'designate') {
      throw new Error(`cannot designate during step ${this.step}`);
    }
    this.designated = q;
    this.step = 'capture';
  }

  eegCaptured(featureDim: number): void {
    if (this.step !== 'capture') {
      throw new Error(`cannot capture EEG during step ${this.step}`);
    }
    if (featureDim <= 0) throw new Error('empty EEG feature vector');
    this.step = 'request';
  }

  songArrived(song: NextSong): void {
    if (this.step !== 'request') {
      throw new Error(`no song expected during step ${this.step}`);
    }
    this.nowPlaying = song;
    this.playbackDone = false;
    this.step = 'play';
  }

  playbackFinished(): void {
    if (this.step !== 'play') {
      throw new Error(`nothing is playing during step ${this.step}`);
    }
    this.playbackDone = true;
    this.step = 'report';
  }

  get reportEnabled(): boolean {
    return this.step === 'report' && this.playbackDone;
  }

  setSliders(valence: number, arousal: number): void {
    for (const v of [valence, arousal]) {
      if (!Number.isFinite(v) || v < SLIDER_MIN || v > SLIDER_MAX) {
        throw new Error(`slider value outside [${SLIDER_MIN}, ${SLIDER_MAX}]: ${v}`);
      }
    }
    this.valenceSlider = valence;
    this.arousalSlider = arousal;
  }

  reported(matched: boolean): TrialRow {
    if (!this.reportEnabled) {
      throw new Error('report is disabled until playback completes');
    }
    const row: TrialRow = {
      songId: this.nowPlaying!.song_id,
      designated: this.designated!,
      valence: this.valenceSlider,
      arousal: this.arousalSlider,
      matched,
    };
    this.history.push(row);
    this.nowPlaying = null;
    this.playbackDone = false;
    this.valenceSlider = 0; // sliders snap back after each submission
    this.arousalSlider = 0;
    this.step = 'request'; // same designation carries over to the next song
    return row;
  }

  statsUpdated(stats: Stats): void {
    this.statsPanel = {
      trialCount: stats.trial_count,
      matchRate: formatRate(stats.match_rate),
      tValence: formatRate(stats.t_valence),
      tArousal: formatRate(stats.t_arousal),
    };
  }
}
