import { SessionClient, QUADRANTS, type Quadrant } from './api.js';
import { SessionController } from './controller.js';
import { SLIDER_MIN, SLIDER_MAX } from './state.js';

const $ = <T extends HTMLElement>(sel: string): T => {
  const el = document.querySelector<T>(sel);
  if (!el) throw new Error(`missing element ${sel}`);
  return el;
};

function render(ctl: SessionController): void {
  const v = ctl.view;
  for (const q of QUADRANTS) {
    const btn = $(`#quadrant-${q}`);
    btn.classList.toggle('selected', v.designated === q);
    (btn as HTMLButtonElement).disabled = v.step !== 'designate';
  }
  ($('#capture') as HTMLButtonElement).disabled = v.step !== 'capture';
  ($('#next-song') as HTMLButtonElement).disabled = v.step !== 'request';
  ($('#report') as HTMLButtonElement).disabled = !v.reportEnabled;
  ($('#valence') as HTMLInputElement).value = String(v.valenceSlider);
  ($('#arousal') as HTMLInputElement).value = String(v.arousalSlider);
  $('#now-playing').textContent = v.nowPlaying
    ? `${v.nowPlaying.song_id} (round ${v.nowPlaying.iteration_count})`
    : '-';
  $('#stat-trials').textContent = String(v.statsPanel.trialCount);
  $('#stat-match').textContent = v.statsPanel.matchRate;
  $('#stat-tv').textContent = v.statsPanel.tValence;
  $('#stat-ta').textContent = v.statsPanel.tArousal;
  $('#error').textContent = v.lastError ?? '';
  const rows = v.history
    .map(
      (r, i) =>
        `<tr><td>${i + 1}</td><td>${r.songId}</td><td>${r.designated}</td>` +
        `<td>${r.valence}</td><td>${r.arousal}</td>` +
        `<td>${r.matched ? 'matched' : 'unmatched'}</td></tr>`
    )
    .join('');
  $('#history tbody').innerHTML = rows;
}

async function guarded(ctl: SessionController, op: () => Promise<void>) {
  ctl.view.lastError = null;
  try {
    await op();
  } catch (err) {
    ctl.view.lastError = err instanceof Error ? err.message : String(err);
  }
  render(ctl);
}

function main(): void {
  const base = (document.body.dataset.service ?? window.location.origin).replace(/\/$/, '');
  const ctl = new SessionController(new SessionClient(base));
  const audio = $('#player') as HTMLAudioElement;

  void guarded(ctl, () => ctl.start(`console-${Date.now()}`));

  for (const q of QUADRANTS) {
    $(`#quadrant-${q}`).addEventListener('click', () =>
      guarded(ctl, () => ctl.designate(q as Quadrant))
    );
  }

  $('#capture').addEventListener('click', () =>
    guarded(ctl, async () => {
      const path = ($('#replay-path') as HTMLInputElement).value.trim();
      if (!path) throw new Error('enter a server-side EEG replay path');
      await ctl.submitEEG({ replay_path: path, window_length: 2 });
    })
  );

  $('#next-song').addEventListener('click', () =>
    guarded(ctl, async () => {
      audio.src = await ctl.requestSong();
      await audio.play();
    })
  );

  audio.addEventListener('ended', () => {
    ctl.playbackEnded();
    render(ctl);
  });

  $('#report').addEventListener('click', () =>
    guarded(ctl, async () => {
      const valence = Number(($('#valence') as HTMLInputElement).value);
      const arousal = Number(($('#arousal') as HTMLInputElement).value);
      await ctl.report(valence, arousal);
    })
  );

  for (const id of ['#valence', '#arousal']) {
    const input = $(id) as HTMLInputElement;
    input.min = String(SLIDER_MIN);
    input.max = String(SLIDER_MAX);
    input.step = '0.5';
  }

  render(ctl);
}

document.addEventListener('DOMContentLoaded', () => main());
