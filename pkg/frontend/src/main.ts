/** Page bootstrap. Configuration comes from the query string:
 *   ?api=http://127.0.0.1:8080&video=video-11&author=me
 *   &src=/path/to/video.mp4          real <video> playback
 *   &duration=341                    scripted scrubber when there is no file
 */

import { ApiClient } from "./api.js";
import { ViblioApp } from "./app.js";
import { Html5Player, ScriptedPlayer, type VideoPlayer } from "./player.js";

function bootstrap(): void {
  const params = new URLSearchParams(window.location.search);
  const apiBase = params.get("api") ?? "http://127.0.0.1:8080";
  const videoId = params.get("video") ?? "video-11";
  const authorId = params.get("author") ?? "web-client";
  const src = params.get("src");
  const duration = Number(params.get("duration") ?? "600");

  const playerHost = document.getElementById("player")!;
  const root = document.getElementById("viblio")!;

  let player: VideoPlayer;
  if (src) {
    const video = document.createElement("video");
    video.controls = true;
    video.src = src;
    video.className = "viblio-video";
    playerHost.appendChild(video);
    player = new Html5Player(video);
  } else {
    // No media file: a scrubber stands in for the player so the citation
    // views can still be exercised against a live server.
    const scripted = new ScriptedPlayer(duration);
    const scrubber = document.createElement("input");
    scrubber.type = "range";
    scrubber.min = "0";
    scrubber.max = String(duration);
    scrubber.step = "0.1";
    scrubber.value = "0";
    scrubber.className = "viblio-scrubber";
    scrubber.addEventListener("input", () => scripted.setTime(Number(scrubber.value)));
    const readout = document.createElement("span");
    readout.className = "viblio-readout";
    scripted.onTimeUpdate(() => {
      scrubber.value = String(scripted.currentTime);
      readout.textContent = `${scripted.currentTime.toFixed(1)}s / ${duration}s`;
    });
    playerHost.appendChild(scrubber);
    playerHost.appendChild(readout);
    player = scripted;
  }

  const app = new ViblioApp(root, new ApiClient(apiBase), player, { videoId, authorId });
  void app.init().catch((err) => {
    root.textContent = `Could not load citations: ${err}`;
  });
}

bootstrap();
