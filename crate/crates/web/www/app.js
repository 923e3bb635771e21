import init, {
  builtin_names, builtin_model_json, simulate_model, classify_model, basin,
} from "./pkg/contagion_web.js";

const $ = (id) => document.getElementById(id);
const COLORS = { Flop: "#2b6cb0", Hit: "#c53030", Interior: "#2f855a", Split: "#b7791f", Timeout: "#718096", Error: "#000" };

function guard(fn) {
  return () => {
    $("error").textContent = "";
    try { fn(); } catch (e) { $("error").textContent = String(e.message ?? e); }
  };
}

function axes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
}

function drawTrajectory(data) {
  const cv = $("traj"), ctx = cv.getContext("2d"), pad = 24;
  const w = cv.width, h = cv.height;
  axes(ctx, w, h, pad);
  const t = data.t, tEnd = t[t.length - 1] || 1;
  const px = (s) => pad + (s / tEnd) * (w - 2 * pad);
  const py = (v) => h - pad - v * (h - 2 * pad);
  const n = data.x[0].length;
  const series = (rows, dash) => {
    for (let i = 0; i < n; i++) {
      ctx.strokeStyle = `hsl(${(360 * i) / n}, 65%, 45%)`;
      ctx.setLineDash(dash);
      ctx.beginPath();
      rows.forEach((r, k) => (k ? ctx.lineTo(px(t[k]), py(r[i])) : ctx.moveTo(px(t[k]), py(r[i]))));
      ctx.stroke();
    }
  };
  series(data.x, []);
  series(data.o, [4, 3]);
  ctx.setLineDash([]);
  ctx.fillStyle = "#333";
  ctx.fillText(`t = ${tEnd.toFixed(1)}`, w - pad - 60, h - 6);
  ctx.fillText("solid x, dashed o", pad, 14);
  $("outcome").textContent = `outcome: ${data.outcome}${data.converged ? "" : " (not converged)"}`;
}

function drawScatter(data) {
  const cv = $("scatter"), ctx = cv.getContext("2d"), pad = 24;
  const w = cv.width, h = cv.height;
  axes(ctx, w, h, pad);
  for (const [mx, mo, label] of data.points) {
    ctx.fillStyle = COLORS[label] ?? "#000";
    ctx.fillRect(pad + mx * (w - 2 * pad) - 2, h - pad - mo * (h - 2 * pad) - 2, 4, 4);
  }
  ctx.fillStyle = "#333";
  ctx.fillText("mean x0", w / 2 - 20, h - 6);
  ctx.fillText("mean o0", 2, 14);
  $("counts").textContent = Object.entries(data.counts).filter(([, c]) => c > 0).map(([k, c]) => `${k}: ${c}`).join("  ");
}

await init();

const select = $("builtin");
for (const name of JSON.parse(builtin_names())) select.add(new Option(name, name));
const load = guard(() => { $("model").value = builtin_model_json(select.value); });
select.addEventListener("change", load);
select.value = "star5";
load();

$("run-sim").addEventListener("click", guard(() => {
  const out = simulate_model($("model").value, +$("x0").value, +$("o0").value, +$("tmax").value);
  drawTrajectory(JSON.parse(out));
}));
$("run-classify").addEventListener("click", guard(() => {
  $("report").textContent = JSON.stringify(JSON.parse(classify_model($("model").value)), null, 2);
}));
$("run-mc").addEventListener("click", guard(() => {
  drawScatter(JSON.parse(basin($("model").value, +$("trials").value, BigInt($("seed").value))));
}));
