// DOM wiring for each screen. Views render controller snapshots and forward
// user actions; all domain numbers displayed come from the controllers'
// API-backed state.

import { ApiError, Client } from "../api.js";
import { FieldEntry, PARAM_COUNT, CLASS_VALUES } from "../controllers/field-entry.js";
import { Inventory } from "../controllers/inventory.js";
import { MapView } from "../controllers/map-view.js";
import { ScenarioPanel } from "../controllers/scenario-panel.js";
import { TypologyBoard } from "../controllers/typology-board.js";
import { Store } from "../state.js";
import { levelColor, renderMapSvg } from "./render-map.js";

function el(html: string): HTMLElement {
  const template = document.createElement("template");
  template.innerHTML = html.trim();
  return template.content.firstElementChild as HTMLElement;
}

function toast(container: HTMLElement, message: string): void {
  const node = el(`<div class="toast">${message}</div>`);
  container.appendChild(node);
  setTimeout(() => node.remove(), 6000);
}

export async function inventoryScreen(
  container: HTMLElement, api: Client, store: Store,
): Promise<void> {
  const ctrl = new Inventory(api);
  await ctrl.load();
  const rows = ctrl.projects.map((p) =>
    `<tr data-id="${p.id}"><td><a href="#" data-open="${p.id}">${p.name}</a></td>` +
    `<td>${p.id}</td><td>${p.state}</td><td>${p.date}</td></tr>`).join("");
  const problems = ctrl.problems.map((p) =>
    `<li>${p.id}: ${p.error}</li>`).join("");
  container.replaceChildren(el(`
    <section>
      <h2>Proyectos</h2>
      <table class="grid">
        <thead><tr><th>Nombre</th><th>Id</th><th>Estado</th><th>Fecha</th></tr></thead>
        <tbody>${rows || "<tr><td colspan=4>(sin proyectos)</td></tr>"}</tbody>
      </table>
      ${problems ? `<h3>Con errores</h3><ul>${problems}</ul>` : ""}
      <button data-new>Nuevo proyecto</button>
    </section>`));
  container.querySelectorAll<HTMLAnchorElement>("a[data-open]").forEach((a) => {
    a.onclick = (ev) => {
      ev.preventDefault();
      store.update({ projectId: a.dataset.open!, screen: "typology-board" });
    };
  });
  (container.querySelector("[data-new]") as HTMLButtonElement).onclick = () =>
    store.update({ screen: "create-project" });
}

export async function typologyBoardScreen(
  container: HTMLElement, api: Client, store: Store,
): Promise<void> {
  const projectId = store.get().projectId!;
  const board = new TypologyBoard(api, projectId);
  await board.load();

  const render = () => {
    const unassigned = board.unassigned.map((k) =>
      `<li><label><input type="checkbox" data-key="${k}"> ${k}</label></li>`).join("");
    const typologies = board.typologies.map((t) =>
      `<tr class="${t.id === board.selectedId ? "selected" : ""}" data-tid="${t.id}">
         <td>${t.id}</td><td>${t.name}</td><td>${t.count}</td><td>${t.surveyed}</td>
         <td>${t.avg_vi_norm?.toFixed(1) ?? "—"}</td><td>${t.level}</td>
         <td><button data-del="${t.id}">eliminar</button></td></tr>`).join("");
    const members = board.memberKeys().map((k) =>
      `<li><label><input type="checkbox" data-member="${k}"> ${k}</label></li>`).join("");
    container.replaceChildren(el(`
      <section class="board">
        <h2>Tipologías</h2>
        <div class="pane"><h3>Subtipologías no asignadas</h3>
          <ul class="keys">${unassigned || "<li>(ninguna)</li>"}</ul>
          <button data-assign>Asignar a la tipología seleccionada</button></div>
        <div class="pane"><h3>Tipologías del proyecto</h3>
          <table class="grid"><thead><tr><th>Id</th><th>Nombre</th><th>Casas</th>
          <th>Encuestadas</th><th>IV medio</th><th>Nivel</th><th></th></tr></thead>
          <tbody>${typologies}</tbody></table>
          <form data-create><input name="name" placeholder="nueva tipología">
          <button>Crear</button></form></div>
        <div class="pane"><h3>Miembros de ${board.selectedId ?? "—"}</h3>
          <ul class="keys">${members || "<li>(vacía)</li>"}</ul>
          <button data-unassign>Desasignar seleccionadas</button></div>
        <div class="toasts"></div>
      </section>`));

    const toasts = container.querySelector(".toasts") as HTMLElement;
    const showError = () => {
      if (board.error) toast(toasts, board.error);
    };
    container.querySelectorAll<HTMLTableRowElement>("tr[data-tid]").forEach((tr) => {
      tr.onclick = () => {
        board.select(tr.dataset.tid!);
        render();
      };
    });
    (container.querySelector("[data-assign]") as HTMLButtonElement).onclick = async () => {
      const keys = [...container.querySelectorAll<HTMLInputElement>("input[data-key]:checked")]
        .map((i) => i.dataset.key!);
      if (board.selectedId && keys.length) {
        await board.assign(board.selectedId, keys);
        showError();
        render();
      }
    };
    (container.querySelector("[data-unassign]") as HTMLButtonElement).onclick = async () => {
      const keys = [
        ...container.querySelectorAll<HTMLInputElement>("input[data-member]:checked"),
      ].map((i) => i.dataset.member!);
      if (board.selectedId && keys.length) {
        await board.unassign(board.selectedId, keys);
        showError();
        render();
      }
    };
    container.querySelectorAll<HTMLButtonElement>("button[data-del]").forEach((b) => {
      b.onclick = async (ev) => {
        ev.stopPropagation();
        await board.remove(b.dataset.del!);
        showError();
        render();
      };
    });
    (container.querySelector("form[data-create]") as HTMLFormElement).onsubmit =
      async (ev) => {
        ev.preventDefault();
        const input = container.querySelector("input[name=name]") as HTMLInputElement;
        if (input.value.trim()) {
          await board.create(input.value.trim());
          showError();
          render();
        }
      };
  };
  render();
}

export async function scenarioScreen(
  container: HTMLElement, api: Client, store: Store,
): Promise<void> {
  const projectId = store.get().projectId!;
  const panel = new ScenarioPanel(api, projectId);
  await panel.load();

  const render = () => {
    const rows = panel.scenarios.map((s) =>
      `<tr><td>${s.id}</td><td>${s.name}</td><td>${s.ag}</td>
       <td>${s.damage_count}</td></tr>`).join("");
    container.replaceChildren(el(`
      <section>
        <h2>Sismos para escenarios de daños</h2>
        <table class="grid"><thead><tr><th>Id</th><th>Nombre</th><th>a/g</th>
        <th>Daños</th></tr></thead><tbody>${rows}</tbody></table>
        <form data-add>
          <input name="ag" type="number" step="0.01" min="0.01" placeholder="a/g" required>
          <input name="name" placeholder="nombre (opcional)">
          <button>Agregar sismo</button>
        </form>
        <div class="warning">${panel.warning ?? ""}</div>
        <button data-maps>Ver mapas</button>
      </section>`));
    (container.querySelector("form[data-add]") as HTMLFormElement).onsubmit =
      async (ev) => {
        ev.preventDefault();
        const ag = parseFloat(
          (container.querySelector("input[name=ag]") as HTMLInputElement).value);
        const name =
          (container.querySelector("input[name=name]") as HTMLInputElement).value;
        await panel.add(ag, name);
        render();
      };
    (container.querySelector("[data-maps]") as HTMLButtonElement).onclick = () =>
      store.update({ screen: "map-view" });
  };
  render();
}

export async function mapScreen(
  container: HTMLElement, api: Client, store: Store,
): Promise<void> {
  const projectId = store.get().projectId!;
  const view = new MapView(api, projectId);
  await view.load();

  const render = () => {
    const granularities = view.granularityOptions().map((g) =>
      `<button data-gran="${g}" class="${g === view.granularity ? "active" : ""}">${g}</button>`
    ).join("");
    const metrics = view.metricOptions().map((m) =>
      `<button data-metric="${m}" class="${m === view.metric ? "active" : ""}">${m}</button>`
    ).join("");
    const scenarios = view.scenarioOptions().map((s) =>
      `<option value="${s.id}" ${s.id === view.scenario ? "selected" : ""}>${s.label}</option>`
    ).join("");
    const legend = view.legend().map((item) =>
      `<span class="chip" style="background:${levelColor(item.level)}">`
      + `${item.level} (${item.count})</span>`).join(" ");
    container.replaceChildren(el(`
      <section>
        <h2>Mapa temático</h2>
        <div class="toolbar">
          <span>Granularidad:</span> ${granularities}
          <span>Métrica:</span> ${metrics}
          <select data-scenario ${view.metric === "Damage" ? "" : "disabled"}>
            ${scenarios}</select>
        </div>
        <div class="legend">${legend}</div>
        <div class="map">${view.collection ? renderMapSvg(view.collection) : ""}</div>
        <p>${view.featureCount()} elementos</p>
      </section>`));
    container.querySelectorAll<HTMLButtonElement>("button[data-gran]").forEach((b) => {
      b.onclick = async () => {
        await view.setGranularity(b.dataset.gran!);
        store.update({
          mapToggles: {
            metric: view.metric, granularity: view.granularity, scenario: view.scenario,
          },
        });
        render();
      };
    });
    container.querySelectorAll<HTMLButtonElement>("button[data-metric]").forEach((b) => {
      b.onclick = async () => {
        const scenario = b.dataset.metric === "Damage"
          ? (view.scenario ?? view.scenarioOptions()[0]?.id ?? null)
          : null;
        await view.setMetric(b.dataset.metric!, scenario);
        render();
      };
    });
    (container.querySelector("select[data-scenario]") as HTMLSelectElement).onchange =
      async (ev) => {
        const id = (ev.target as HTMLSelectElement).value;
        await view.setMetric("Damage", id);
        render();
      };
  };
  render();
}

export async function fieldEntryScreen(
  container: HTMLElement, api: Client, store: Store,
): Promise<void> {
  const projectId = store.get().projectId!;
  const ctrl = new FieldEntry(api, projectId);

  const render = () => {
    const b = ctrl.building;
    const surveyRows = Array.from({ length: PARAM_COUNT }, (_, i) => {
      const options = CLASS_VALUES.map((v) =>
        `<label><input type="radio" name="p${i + 1}" value="${v}"
          ${ctrl.classes[i] === v ? "checked" : ""}> ${v}</label>`).join(" ");
      return `<tr><td>${i + 1}</td><td>${options}</td></tr>`;
    }).join("");
    container.replaceChildren(el(`
      <section>
        <h2>Información de campo</h2>
        <form data-lookup>
          <input name="bid" type="number" placeholder="id de vivienda"
            value="${b?.id ?? ""}" required>
          <button>Abrir</button>
        </form>
        ${b ? `
        <div class="building">
          <p>Vivienda ${b.id} (${b.kind}) — ${b.block_key ?? "sin manzana"} —
             ${b.surveyed ? `IV norm ${b.vi_norm?.toFixed(2)}` : "sin encuesta"}</p>
          <form data-location>
            <input name="x" type="number" step="any" placeholder="x"
              value="${b.coord?.[0] ?? ""}" required>
            <input name="y" type="number" step="any" placeholder="y"
              value="${b.coord?.[1] ?? ""}" required>
            <input name="photo" placeholder="id de foto" value="${b.photo_id ?? ""}">
            <button>Guardar punto GPS / foto</button>
          </form>
          ${ctrl.surveyVisible() ? `
          <h3>Levantamiento (11 parámetros)</h3>
          <table class="grid"><tbody>${surveyRows}</tbody></table>
          <button data-survey>Enviar encuesta</button>` : `
          <p><em>No seleccionada para encuesta.</em></p>`}
          <div class="warning">${ctrl.error ?? ""}</div>
        </div>` : ""}
      </section>`));

    (container.querySelector("form[data-lookup]") as HTMLFormElement).onsubmit =
      async (ev) => {
        ev.preventDefault();
        const bid = parseInt(
          (container.querySelector("input[name=bid]") as HTMLInputElement).value, 10);
        try {
          await ctrl.load(bid);
        } catch (e) {
          ctrl.error = e instanceof ApiError ? `${e.code}: ${e.message}` : String(e);
        }
        render();
      };
    const locationForm = container.querySelector("form[data-location]") as HTMLFormElement;
    if (locationForm) {
      locationForm.onsubmit = async (ev) => {
        ev.preventDefault();
        const num = (name: string) => parseFloat(
          (locationForm.querySelector(`input[name=${name}]`) as HTMLInputElement).value);
        const photo =
          (locationForm.querySelector("input[name=photo]") as HTMLInputElement).value;
        await ctrl.submitLocation(num("x"), num("y"), photo || undefined);
        render();
      };
    }
    const surveyButton = container.querySelector("[data-survey]") as HTMLButtonElement;
    if (surveyButton) {
      surveyButton.onclick = async () => {
        container.querySelectorAll<HTMLInputElement>("input[type=radio]:checked")
          .forEach((input) => {
            ctrl.setClass(parseInt(input.name.slice(1), 10), input.value);
          });
        await ctrl.submitSurvey();
        render();
      };
    }
  };
  render();
}
