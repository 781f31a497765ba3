import init, { clusterDemo, fixationDemo, labelDemo, referenceAois } from "./pkg/gazelens_web.js";

const COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];
const $ = (id) => document.getElementById(id);

function surface(id, width, height) {
  const canvas = $(id);
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const s = Math.min(canvas.width / width, canvas.height / height);
  return { ctx, x: (v) => v * s, y: (v) => v * s, s };
}

function dot(ctx, x, y, r, color) {
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.fill();
}

function fail(infoId, e) {
  $(infoId).innerHTML = `<span class="err">${e.message ?? e}</span>`;
}

function drawClusters() {
  try {
    const d = JSON.parse(clusterDemo(+$("k").value, +$("sigma").value, +$("cseed").value));
    const v = surface("clusters", d.width, d.height);
    d.points.forEach((p, i) => dot(v.ctx, v.x(p[0]), v.y(p[1]), 1.5, COLORS[d.model.assignments[i] % COLORS.length]));
    d.model.rank_order.forEach((c, rank) => {
      const [cx, cy] = d.model.centroids[c];
      dot(v.ctx, v.x(cx), v.y(cy), 7, "#000");
      v.ctx.fillText(`#${rank + 1} (${d.model.counts[c]})`, v.x(cx) + 9, v.y(cy) - 9);
    });
    $("cinfo").textContent = `${d.model.iterations} iterations, inertia ${d.model.inertia.toFixed(0)}`;
  } catch (e) {
    fail("cinfo", e);
  }
}

function drawFixations() {
  try {
    const d = JSON.parse(fixationDemo(+$("disp").value, +$("mindur").value, +$("fseed").value));
    const v = surface("fixations", d.width, d.height);
    v.ctx.strokeStyle = "rgba(0,0,0,0.15)";
    v.ctx.beginPath();
    d.gaze.forEach((p, i) => (i ? v.ctx.lineTo(v.x(p[0]), v.y(p[1])) : v.ctx.moveTo(v.x(p[0]), v.y(p[1]))));
    v.ctx.stroke();
    for (const f of d.fixations) {
      dot(v.ctx, v.x(f.centroid_x), v.y(f.centroid_y), Math.max(3, Math.sqrt(f.duration_ms) * v.s * 0.8), "rgba(214,39,40,0.45)");
    }
    const mean = d.fixations.reduce((a, f) => a + f.duration_ms, 0) / Math.max(1, d.fixations.length);
    $("finfo").textContent = `${d.fixations.length} fixations, mean ${mean.toFixed(0)} ms`;
  } catch (e) {
    fail("finfo", e);
  }
}

function drawLabels() {
  try {
    const d = JSON.parse(labelDemo($("aois").value, +$("sw").value, +$("sh").value));
    const v = surface("labels", d.width, d.height);
    v.ctx.strokeStyle = "#999";
    v.ctx.beginPath();
    v.ctx.moveTo(v.x(d.width / 2), 0);
    v.ctx.lineTo(v.x(d.width / 2), v.y(d.height));
    v.ctx.moveTo(0, v.y(d.height / 2));
    v.ctx.lineTo(v.x(d.width), v.y(d.height / 2));
    v.ctx.stroke();
    v.ctx.strokeStyle = "#2ca02c";
    for (const a of d.aois) {
      v.ctx.strokeRect(v.x(a.x), v.y(a.y), v.x(a.width), v.y(a.height));
      v.ctx.fillText(a.aoi_id, v.x(a.x) + 3, v.y(a.y) + 12);
    }
    const rows = new Map(d.rows.map((r) => [r.sample_index, r]));
    d.samples.forEach((p, i) => dot(v.ctx, v.x(p[0]), v.y(p[1]), 4, rows.get(i)?.agrees === false ? "#d62728" : "#1f77b4"));
    $("linfo").textContent = `${d.agree} agree, ${d.disagree} disagree`;
    $("rows").innerHTML =
      "<tr><th>#</th><th>logged</th><th>recomputed</th></tr>" +
      d.rows
        .map((r) => `<tr class="${r.agrees ? "" : "bad"}"><td>${r.sample_index + 1}</td><td>${r.source}</td><td>${r.recomputed}</td></tr>`)
        .join("");
  } catch (e) {
    fail("linfo", e);
  }
}

await init();
$("aois").value = referenceAois();
for (const id of ["k", "sigma", "cseed"]) $(id).addEventListener("input", drawClusters);
for (const id of ["disp", "mindur", "fseed"]) $(id).addEventListener("input", drawFixations);
for (const id of ["aois", "sw", "sh"]) $(id).addEventListener("input", drawLabels);
drawClusters();
drawFixations();
drawLabels();
