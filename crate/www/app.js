import init, { scan_curve, optimize_profile, three_site_landscape } from "./pkg/enaqt_wasm.js";

const $ = (id) => document.getElementById(id);

// ---- small canvas helpers -------------------------------------------------

function clear(ctx) {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
}

function frame(ctx, m) {
  const { width: w, height: h } = ctx.canvas;
  ctx.strokeStyle = "#444";
  ctx.lineWidth = 1;
  ctx.strokeRect(m.l, m.t, w - m.l - m.r, h - m.t - m.b);
}

function xlog(value, lo, hi, m, w) {
  const t = (Math.log10(value) - Math.log10(lo)) / (Math.log10(hi) - Math.log10(lo));
  return m.l + t * (w - m.l - m.r);
}

function ylin(value, lo, hi, m, h) {
  const t = (value - lo) / (hi - lo || 1);
  return h - m.b - t * (h - m.t - m.b);
}

function axisLabel(ctx, text, x, y, angle = 0) {
  ctx.save();
  ctx.translate(x, y);
  ctx.rotate(angle);
  ctx.fillStyle = "#333";
  ctx.font = "12px system-ui";
  ctx.textAlign = "center";
  ctx.fillText(text, 0, 0);
  ctx.restore();
}

function logTicks(ctx, lo, hi, m, pos) {
  const { width: w, height: h } = ctx.canvas;
  ctx.fillStyle = "#555";
  ctx.font = "10px system-ui";
  ctx.textAlign = "center";
  for (let d = Math.ceil(Math.log10(lo)); d <= Math.floor(Math.log10(hi)); d++) {
    const x = xlog(10 ** d, lo, hi, m, w);
    ctx.fillText(`1e${d}`, x, h - m.b + 14);
    ctx.strokeStyle = "#eee";
    ctx.beginPath();
    ctx.moveTo(x, m.t);
    ctx.lineTo(x, h - m.b);
    ctx.stroke();
  }
  void pos;
}

// Shared color scale: viridis-ish piecewise ramp.
function heatColor(t) {
  const stops = [
    [68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37],
  ];
  const x = Math.max(0, Math.min(1, t)) * (stops.length - 1);
  const i = Math.min(stops.length - 2, Math.floor(x));
  const f = x - i;
  const c = stops[i].map((v, k) => Math.round(v + f * (stops[i + 1][k] - v)));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

function heatmap(ctx, rows, title, logScale, extra = {}) {
  clear(ctx);
  const m = { l: 34, r: 10, t: 24, b: 26 };
  const { width: w, height: h } = ctx.canvas;
  const n = rows.length;
  const cw = (w - m.l - m.r) / n;
  const ch = (h - m.t - m.b) / n;
  let lo = Infinity, hi = -Infinity;
  for (const row of rows) for (const v of row) {
    if (v === null || !isFinite(v)) continue;
    const x = logScale ? Math.log10(Math.max(v, 1e-16)) : v;
    if (x < lo) lo = x;
    if (x > hi) hi = x;
  }
  if (extra.floor !== undefined) lo = Math.max(lo, extra.floor);
  for (let r = 0; r < n; r++) {
    for (let c = 0; c < n; c++) {
      const v = rows[r][c];
      if (v === null || !isFinite(v)) {
        ctx.fillStyle = "#ddd";
      } else {
        const x = logScale ? Math.log10(Math.max(v, 1e-16)) : v;
        ctx.fillStyle = heatColor((x - lo) / (hi - lo || 1));
      }
      // Row 0 at the top mirrors matrix layout.
      ctx.fillRect(m.l + c * cw, m.t + r * ch, cw + 0.5, ch + 0.5);
    }
  }
  frame(ctx, m);
  axisLabel(ctx, title, w / 2, 14);
  axisLabel(ctx, "site n", w / 2, h - 6);
  axisLabel(ctx, "site m", 12, h / 2, -Math.PI / 2);
}

// ---- panel 1: uniform scan ------------------------------------------------

function drawScan(data) {
  const ctx = $("scan-plot").getContext("2d");
  clear(ctx);
  const m = { l: 58, r: 14, t: 14, b: 34 };
  const { width: w, height: h } = ctx.canvas;
  const gLo = data.curve[0][0];
  const gHi = data.curve[data.curve.length - 1][0];
  const eHi = Math.max(...data.curve.map((p) => p[1]), data.peak_flux) * 1.08;

  logTicks(ctx, gLo, gHi, m);
  frame(ctx, m);

  ctx.strokeStyle = "#7743c9";
  ctx.lineWidth = 2;
  ctx.beginPath();
  data.curve.forEach(([g, e], i) => {
    const x = xlog(g, gLo, gHi, m, w);
    const y = ylin(e, 0, eHi, m, h);
    i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
  });
  ctx.stroke();

  const px = xlog(data.peak_gamma, gLo, gHi, m, w);
  ctx.strokeStyle = "#1f7a6d";
  ctx.setLineDash([5, 4]);
  ctx.beginPath();
  ctx.moveTo(px, m.t);
  ctx.lineTo(px, h - m.b);
  ctx.stroke();
  ctx.setLineDash([]);

  axisLabel(ctx, "uniform dephasing Γ", w / 2, h - 4);
  axisLabel(ctx, "flux η", 14, h / 2, -Math.PI / 2);

  ctx.fillStyle = "#555";
  ctx.font = "10px system-ui";
  ctx.textAlign = "left";
  for (const t of [0.25, 0.5, 0.75, 1.0]) {
    const y = ylin(t * eHi, 0, eHi, m, h);
    ctx.fillText((t * eHi).toExponential(1), 4, y + 3);
  }
}

async function runScan() {
  const note = $("scan-note");
  try {
    note.classList.remove("error");
    note.textContent = "computing…";
    await tick();
    const data = JSON.parse(
      scan_curve($("scan-system").value, int("scan-n"), num("scan-alpha"), int("scan-seed"), 101)
    );
    drawScan(data);
    note.textContent =
      `peak: Γ_u = ${data.peak_gamma.toPrecision(3)}, η_u = ${data.peak_flux.toExponential(3)}`;
  } catch (e) {
    fail(note, e);
  }
}

// ---- panel 2: optimizer ---------------------------------------------------

function drawProfile(data) {
  const ctx = $("opt-profile").getContext("2d");
  clear(ctx);
  const m = { l: 46, r: 46, t: 20, b: 30 };
  const { width: w, height: h } = ctx.canvas;
  const n = data.energies.length;
  const xs = (i) => m.l + ((i + 0.5) / n) * (w - m.l - m.r);
  frame(ctx, m);

  const eLo = Math.min(...data.energies) - 0.05;
  const eHi = Math.max(...data.energies) + 0.05;
  ctx.strokeStyle = "#9a9287";
  ctx.lineWidth = 2;
  ctx.beginPath();
  data.energies.forEach((e, i) => {
    const y = ylin(e, eLo, eHi, m, h);
    i === 0 ? ctx.moveTo(xs(i), y) : ctx.lineTo(xs(i), y);
  });
  ctx.stroke();

  const lg = data.gammas_opt.map((g) => Math.log10(g));
  ctx.fillStyle = "#7743c9";
  lg.forEach((v, i) => {
    const y = ylin(v, -7.2, 0.2, m, h);
    ctx.beginPath();
    ctx.arc(xs(i), y, 4, 0, 2 * Math.PI);
    ctx.fill();
  });
  ctx.strokeStyle = "#7743c9";
  ctx.lineWidth = 1;
  ctx.beginPath();
  lg.forEach((v, i) => {
    const y = ylin(v, -7.2, 0.2, m, h);
    i === 0 ? ctx.moveTo(xs(i), y) : ctx.lineTo(xs(i), y);
  });
  ctx.stroke();

  const gu = Math.log10(data.gamma_u);
  ctx.strokeStyle = "#1f7a6d";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(m.l, ylin(gu, -7.2, 0.2, m, h));
  ctx.lineTo(w - m.r, ylin(gu, -7.2, 0.2, m, h));
  ctx.stroke();
  ctx.setLineDash([]);

  axisLabel(ctx, "site", w / 2, h - 6);
  axisLabel(ctx, "energy (gray)", 12, h / 2, -Math.PI / 2);
  axisLabel(ctx, "log10 Γ_opt (purple, dashed = Γ_u)", w - 10, h / 2, Math.PI / 2);
}

function drawPops(data) {
  const ctx = $("opt-pops").getContext("2d");
  clear(ctx);
  const m = { l: 50, r: 12, t: 20, b: 30 };
  const { width: w, height: h } = ctx.canvas;
  const n = data.pop_uniform.length;
  const xs = (i) => m.l + ((i + 0.5) / n) * (w - m.l - m.r);
  const hi = Math.max(...data.pop_uniform, ...data.pop_optimized) * 1.1;
  frame(ctx, m);
  for (const [key, color] of [["pop_uniform", "#9a9287"], ["pop_optimized", "#7743c9"]]) {
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    data[key].forEach((p, i) => {
      const y = ylin(p, 0, hi, m, h);
      i === 0 ? ctx.moveTo(xs(i), y) : ctx.lineTo(xs(i), y);
    });
    ctx.stroke();
  }
  axisLabel(ctx, "site", w / 2, h - 6);
  axisLabel(ctx, "population (gray: uniform, purple: optimized)", 14, h / 2, -Math.PI / 2);
}

async function runOptimize() {
  const note = $("opt-note");
  const button = $("opt-run");
  try {
    note.classList.remove("error");
    note.textContent = "optimizing… (this runs a full ascent in your browser)";
    button.disabled = true;
    await tick();
    const data = JSON.parse(
      optimize_profile($("opt-system").value, int("opt-n"), num("opt-alpha"), int("opt-seed"), int("opt-steps"))
    );
    drawProfile(data);
    drawPops(data);
    heatmap($("opt-coh-u").getContext("2d"), data.coh_uniform, "|ρ| uniform (log)", true, { floor: -8 });
    heatmap($("opt-coh-o").getContext("2d"), data.coh_optimized, "|ρ| optimized (log)", true, { floor: -8 });
    heatmap($("opt-ratio").getContext("2d"), data.ratio, "|ρ_o| / |ρ_u|", false);
    note.textContent =
      `η: ${data.eta_u.toExponential(3)} → ${data.eta_opt.toExponential(3)} ` +
      `(+${(100 * data.improvement).toFixed(1)}%)   ` +
      `ℓ: ${data.ell_u.toFixed(2)} → ${data.ell_opt.toFixed(2)}   ` +
      `[${data.termination}, ${data.steps} steps]`;
  } catch (e) {
    fail(note, e);
  } finally {
    button.disabled = false;
  }
}

// ---- panel 3: three-site landscape -----------------------------------------

function drawLandscape(data) {
  const ctx = $("ls-plot").getContext("2d");
  clear(ctx);
  const m = { l: 50, r: 14, t: 14, b: 40 };
  const { width: w, height: h } = ctx.canvas;
  const n = data.grid.length;
  const cw = (w - m.l - m.r) / n;
  const ch = (h - m.t - m.b) / n;
  const vals = data.eta.flat();
  const lo = Math.log10(Math.max(Math.min(...vals), 1e-12));
  const hi = Math.log10(Math.max(...vals));
  for (let r = 0; r < n; r++) {
    for (let c = 0; c < n; c++) {
      // rows index Γ3 (y, increasing upward), columns Γ2 (x).
      ctx.fillStyle = heatColor((Math.log10(Math.max(data.eta[r][c], 1e-12)) - lo) / (hi - lo || 1));
      ctx.fillRect(m.l + c * cw, h - m.b - (r + 1) * ch, cw + 0.5, ch + 0.5);
    }
  }
  frame(ctx, m);
  const gLo = data.grid[0];
  const gHi = data.grid[n - 1];
  const px = xlog(data.peak_gamma2, gLo, gHi, m, w);
  const py = h - m.b - ((Math.log10(data.peak_gamma3) - Math.log10(gLo)) / (Math.log10(gHi) - Math.log10(gLo))) * (h - m.t - m.b);
  ctx.strokeStyle = "#fff";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(px, py, 6, 0, 2 * Math.PI);
  ctx.stroke();
  logTicks(ctx, gLo, gHi, m);
  axisLabel(ctx, "Γ₂ (middle site)", w / 2, h - 6);
  axisLabel(ctx, "Γ₃ (exit site)", 14, h / 2, -Math.PI / 2);
}

async function runLandscape() {
  const note = $("ls-note");
  try {
    note.classList.remove("error");
    note.textContent = "computing…";
    await tick();
    const data = JSON.parse(three_site_landscape(num("ls-alpha"), 61));
    drawLandscape(data);
    note.textContent =
      `maximum η = ${data.peak_flux.toExponential(3)} at ` +
      `Γ₂ = ${data.peak_gamma2.toPrecision(2)}, Γ₃ = ${data.peak_gamma3.toPrecision(2)}`;
  } catch (e) {
    fail(note, e);
  }
}

// ---- wiring -----------------------------------------------------------------

const int = (id) => parseInt($(id).value, 10);
const num = (id) => parseFloat($(id).value);
const tick = () => new Promise((r) => setTimeout(r, 15));

function fail(note, e) {
  note.classList.add("error");
  note.textContent = `error: ${e}`;
}

await init();
$("scan-run").addEventListener("click", runScan);
$("opt-run").addEventListener("click", runOptimize);
$("ls-run").addEventListener("click", runLandscape);
runScan();
runLandscape();
