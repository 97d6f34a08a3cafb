import init, { parse_caption, preannotate, box_at_frame } from "./pkg/charonette_wasm_demo.js";

const $ = (id) => document.getElementById(id);

function escapeHtml(s) {
  return s.replace(/[&<>"]/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;" })[c]);
}

// Wraps char spans of `text` in elements built by `wrap`.
function highlight(text, spans, wrap) {
  const chars = Array.from(text);
  let out = "";
  let pos = 0;
  for (const s of [...spans].sort((a, b) => a.span.start - b.span.start)) {
    out += escapeHtml(chars.slice(pos, s.span.start).join(""));
    out += wrap(s, escapeHtml(chars.slice(s.span.start, s.span.end).join("")));
    pos = s.span.end;
  }
  return out + escapeHtml(chars.slice(pos).join(""));
}

function showError(el, result) {
  el.innerHTML = `<span class="error">${escapeHtml(result.error)}</span>`;
}

function renderCaption() {
  const out = $("caption-out");
  const result = JSON.parse(parse_caption($("caption").value));
  if (result.error) return showError(out, result);
  out.innerHTML =
    highlight(result.plain, result.mentions, (m, t) => `<span class="mention">${t}<sub>${m.entity_id} ${escapeHtml(m.entity_type)}</sub></span>`) +
    `<br><small>${result.mentions.length} entity mentions</small>`;
}

function renderSentence() {
  const text = $("sentence").value;
  const targets = JSON.parse(preannotate(text));
  $("sentence-out").innerHTML = highlight(text, targets, (t, w) => `<span class="target">${w}<sup>${escapeHtml(t.chosen_frame ?? "?")}</sup></span>`);
  const rows = targets.map((t) =>
    `<tr><td>${escapeHtml(t.text)}</td><td>${escapeHtml(t.lemma)}.${t.pos}</td><td>${escapeHtml(t.candidate_frames.join(", "))}</td><td>${escapeHtml(t.chosen_frame ?? "")}</td></tr>`);
  $("sentence-table").innerHTML = "<tr><th>target</th><th>lemma</th><th>candidates</th><th>chosen</th></tr>" + rows.join("");
}

const track = {
  width: 640,
  height: 360,
  keyframes: [
    { frame: 0, box: { xmin: 40, ymin: 60, xmax: 200, ymax: 300 } },
    { frame: 30, box: { xmin: 260, ymin: 40, xmax: 420, ymax: 260 } },
    { frame: 50, box: { xmin: 430, ymin: 120, xmax: 600, ymax: 340 } },
  ],
};

function renderBox() {
  const frame = Number($("frame").value);
  const result = JSON.parse(box_at_frame(JSON.stringify(track), frame));
  if (result.error) return showError($("box-out"), result);
  $("frame-label").textContent = `${frame} (${(result.time_ms / 1000).toFixed(2)} s)`;
  const ctx = $("canvas").getContext("2d");
  ctx.clearRect(0, 0, track.width, track.height);
  ctx.setLineDash([4, 4]);
  ctx.strokeStyle = "#94a3b8";
  for (const k of track.keyframes) {
    ctx.strokeRect(k.box.xmin, k.box.ymin, k.box.xmax - k.box.xmin, k.box.ymax - k.box.ymin);
  }
  ctx.setLineDash([]);
  const b = result.box;
  if (b) {
    ctx.strokeStyle = "#dc2626";
    ctx.lineWidth = 3;
    ctx.strokeRect(b.xmin, b.ymin, b.xmax - b.xmin, b.ymax - b.ymin);
    ctx.lineWidth = 1;
    $("box-out").textContent = `box (${b.xmin}, ${b.ymin}) to (${b.xmax}, ${b.ymax})`;
  } else {
    $("box-out").textContent = "no box at this frame";
  }
}

await init();
$("caption").addEventListener("input", renderCaption);
$("sentence").addEventListener("input", renderSentence);
$("frame").addEventListener("input", renderBox);
renderCaption();
renderSentence();
renderBox();
