import init, { Explorer } from "./pkg/cohort_sna_web.js";

const PALETTE = ["green", "pink", "red", "palegreen", "brown", "grey", "black", "yellow",
  "cyan", "blue", "orange", "purple", "magenta", "navy", "olive"];
const $ = (id) => document.getElementById(id);

let explorer;

function colour(c) {
  return c == null ? "#999" : PALETTE[c % PALETTE.length];
}

function clear(ctx) {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
}

// Clusters sit on a large ring, members on a small ring around each centre.
function layout(nodes) {
  const byCluster = new Map();
  for (const n of nodes) {
    const c = n.cluster ?? -1;
    if (!byCluster.has(c)) byCluster.set(c, []);
    byCluster.get(c).push(n);
  }
  const clusters = [...byCluster.keys()].sort((a, b) => a - b);
  const pos = new Map();
  const W = 620, R = clusters.length > 1 ? 220 : 0;
  clusters.forEach((c, i) => {
    const a = (2 * Math.PI * i) / clusters.length;
    const cx = W / 2 + R * Math.cos(a), cy = W / 2 + R * Math.sin(a);
    const members = byCluster.get(c);
    const r = members.length > 1 ? 12 + 4 * Math.sqrt(members.length) : 0;
    members.forEach((n, j) => {
      const b = (2 * Math.PI * j) / members.length;
      pos.set(n.id, [cx + r * Math.cos(b), cy + r * Math.sin(b)]);
    });
  });
  return pos;
}

function drawSociogram() {
  const g = JSON.parse(explorer.graph());
  const ctx = $("sociogram").getContext("2d");
  clear(ctx);
  const pos = layout(g.nodes);
  for (const e of g.edges) {
    const [x1, y1] = pos.get(e.source), [x2, y2] = pos.get(e.target);
    ctx.strokeStyle = e.mutual ? "rgba(0,0,0,0.25)" : "rgba(200,0,0,0.35)";
    ctx.beginPath();
    ctx.moveTo(x1, y1);
    ctx.lineTo(x2, y2);
    ctx.stroke();
  }
  for (const n of g.nodes) {
    const [x, y] = pos.get(n.id);
    const size = 3 + 5 * ((n.mark ?? 50) / 100);
    ctx.fillStyle = colour(n.cluster);
    ctx.strokeStyle = "#333";
    ctx.beginPath();
    if (n.gender === "F") ctx.rect(x - size, y - size, 2 * size, 2 * size);
    else ctx.arc(x, y, size, 0, 2 * Math.PI);
    ctx.fill();
    ctx.stroke();
  }
}

function drawCurve(curve, chosen) {
  const ctx = $("curve").getContext("2d");
  clear(ctx);
  const W = ctx.canvas.width, H = ctx.canvas.height, pad = 30;
  const qs = curve.map((p) => p[1]);
  const lo = Math.min(0, ...qs), hi = Math.max(...qs, 0.01);
  const bw = (W - 2 * pad) / curve.length;
  const y = (q) => H - pad - ((q - lo) / (hi - lo)) * (H - 2 * pad);
  ctx.font = "11px sans-serif";
  curve.forEach(([k, q], i) => {
    ctx.fillStyle = k === chosen ? "#c60" : "#69c";
    const top = Math.min(y(q), y(0)), h = Math.abs(y(q) - y(0));
    ctx.fillRect(pad + i * bw + 2, top, bw - 4, h);
    ctx.fillStyle = "#333";
    ctx.fillText(String(k), pad + i * bw + bw / 2 - 4, H - pad + 14);
  });
  ctx.fillText("Q by number of clusters", pad, 14);
}

function showCommunities(k) {
  const c = JSON.parse(explorer.communities(k));
  const select = $("k");
  if (select.options.length === 0) {
    for (const [kk] of c.curve) select.add(new Option(String(kk), String(kk)));
  }
  select.value = String(c.k);
  $("q").textContent = `Q = ${c.q.toFixed(3)}${c.k === c.best_k ? " (best)" : ""}`;
  drawCurve(c.curve, c.k);
  drawSociogram();
  showPlan();
}

function row(cells, tag = "td") {
  const tr = document.createElement("tr");
  for (const c of cells) {
    const td = document.createElement(tag);
    td.textContent = c;
    tr.appendChild(td);
  }
  return tr;
}

function showPlan() {
  const classes = $("classes"), groups = $("groups"), notes = $("notes");
  classes.replaceChildren();
  groups.replaceChildren();
  notes.replaceChildren();
  $("plan-error").textContent = "";
  let result;
  try {
    result = JSON.parse(explorer.plan(+$("high").value, +$("low").value,
      Math.max(0, Math.floor(+$("max-group").value)), $("keep-low").checked));
  } catch (err) {
    $("plan-error").textContent = String(err);
    return;
  }
  classes.appendChild(row(["cluster", "size", "mean", "class"], "th"));
  for (const c of result.clusters) {
    classes.appendChild(row([c.cluster, c.members.length, c.mean_mark.toFixed(1), c.class]));
  }
  groups.appendChild(row(["group", "anchor", "size", "mean", "from high", "dispersed", ""], "th"));
  result.plan.groups.forEach((g, i) => {
    const p = result.profile[i];
    groups.appendChild(row([i, g.anchor, p.size, p.mean_mark.toFixed(1), p.from_high, p.dispersed,
      g.overflow ? "overflow" : ""]));
  });
  for (const n of result.plan.notes) {
    const li = document.createElement("li");
    li.textContent = n;
    notes.appendChild(li);
  }
}

function showHistogram() {
  $("hist-error").textContent = "";
  let s;
  try {
    s = JSON.parse(explorer.histogram(+$("bin").value));
  } catch (err) {
    $("hist-error").textContent = String(err);
    return;
  }
  const ctx = $("histogram").getContext("2d");
  clear(ctx);
  const W = ctx.canvas.width, H = ctx.canvas.height, pad = 30;
  const max = Math.max(...s.histogram.map((b) => b.count), 1);
  const bw = (W - 2 * pad) / s.histogram.length;
  ctx.font = "11px sans-serif";
  s.histogram.forEach((b, i) => {
    const h = (b.count / max) * (H - 2 * pad);
    ctx.fillStyle = "#69c";
    ctx.fillRect(pad + i * bw + 1, H - pad - h, bw - 2, h);
    ctx.fillStyle = "#333";
    ctx.fillText(String(b.lower), pad + i * bw, H - pad + 14);
  });
  const fmt = (v) => (v == null ? "n/a" : v.toFixed(3));
  $("stats").textContent = [
    `n        ${s.n}`,
    `mean     ${s.mean.toFixed(2)}`,
    `median   ${s.median.toFixed(2)}`,
    `range    ${s.min} to ${s.max}`,
    `std dev  ${fmt(s.std_dev)}`,
    `skewness ${fmt(s.skewness)}${s.shape ? " (" + s.shape.replace(/([a-z])([A-Z])/g, "$1 $2").toLowerCase() + ")" : ""}`,
  ].join("\n");
}

function showAll() {
  const s = JSON.parse(explorer.summary());
  const r = s.reciprocity == null ? "n/a" : s.reciprocity.toFixed(3);
  $("summary").textContent = `${s.label}: ${s.students} students, ${s.nominations} nominations, ` +
    `${s.components} component(s), reciprocity ${r}, marks ${s.semester ?? "none"}`;
  $("k").replaceChildren();
  showCommunities(0);
  showHistogram();
}

function use(next) {
  if (explorer) explorer.free();
  explorer = next;
  showAll();
}

await init();
use(new Explorer());

$("k").addEventListener("change", (e) => showCommunities(+e.target.value));
for (const id of ["high", "low", "max-group", "keep-low"]) $(id).addEventListener("change", showPlan);
$("bin").addEventListener("change", showHistogram);
$("load").addEventListener("click", () => {
  $("load-error").textContent = "";
  try {
    use(Explorer.from_csv($("roster-text").value, $("edges-text").value));
  } catch (err) {
    $("load-error").textContent = String(err);
  }
});
$("load-demo").addEventListener("click", () => use(new Explorer()));
