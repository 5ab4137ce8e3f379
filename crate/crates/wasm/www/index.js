// Built by `wasm-bindgen --target web --out-dir www/pkg`.
import init, { systems, figure_svg, expand_orbit, estimate_symmetry } from "./pkg/mcf_wasm.js";

const $ = (id) => document.getElementById(id);

function show(el, f) {
  try {
    el.classList.remove("err");
    return f();
  } catch (e) {
    el.classList.add("err");
    el.textContent = String(e);
  }
}

function fill(select, names, pick) {
  for (const name of names) {
    const o = document.createElement("option");
    o.value = o.textContent = name;
    select.appendChild(o);
  }
  select.value = pick;
}

await init();
const catalogue = JSON.parse(systems());
const names = catalogue.map((s) => s.name);
fill($("fig-system"), names.filter((n) => n !== "gauss"), "poincare");
fill($("orb-system"), names, "gs");
fill($("sym-system"), catalogue.filter((s) => s.full).map((s) => s.name), "poincare");

$("fig-go").onclick = () =>
  show($("figure"), () => {
    $("figure").innerHTML = figure_svg($("fig-system").value, +$("fig-depth").value, $("fig-dual").checked, 480);
  });

$("orb-go").onclick = () =>
  show($("orbit"), () => {
    const r = JSON.parse(expand_orbit($("orb-system").value, +$("orb-n").value, $("orb-x").value, +$("orb-steps").value));
    let text = r.digits.join(" ") || "(no digits)";
    if (r.stopped) text += `\nstopped: ${r.stopped}`;
    $("orbit").textContent = text + `\nlast point: ${r.point.map((v) => v.toPrecision(6)).join(", ")}`;
  });

$("sym-go").onclick = () =>
  show($("symmetry"), () => {
    $("symmetry").textContent = "running...";
    const r = JSON.parse(
      estimate_symmetry($("sym-system").value, +$("sym-n").value, $("sym-digits").value, +$("sym-samples").value, 42),
    );
    const f = (v, e) => `${v.toExponential(5)} ± ${e.toExponential(1)}`;
    $("symmetry").textContent =
      `B(${r.digits})          ${f(r.forward, r.forward_stderr)}\n` +
      `reversed string   ${f(r.reversed, r.reversed_stderr)}\n` +
      `z = ${r.z.toFixed(2)}   ${r.verdict}${r.warning ? " (warning)" : ""}`;
  });

$("fig-go").click();
