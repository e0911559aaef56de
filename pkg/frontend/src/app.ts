// Screen switcher: one pane per workflow step, driven by the view-state store.

import { Client } from "./api.js";
import { SCREENS, Screen, Store } from "./state.js";
import {
  fieldEntryScreen,
  inventoryScreen,
  mapScreen,
  scenarioScreen,
  typologyBoardScreen,
} from "./views/screens.js";

const SCREEN_LABELS: Record<Screen, string> = {
  "inventory": "Proyectos",
  "create-project": "Nuevo proyecto",
  "types": "Tipos",
  "typology-board": "Tipologías",
  "sampling": "Muestreo",
  "field-forms": "Formatos de campo",
  "field-entry": "Datos de campo",
  "scenarios": "Sismos",
  "map-view": "Mapa",
};

export class App {
  private readonly store = new Store();

  constructor(
    private readonly api: Client,
    private readonly nav: HTMLElement,
    private readonly content: HTMLElement,
  ) {
    this.store.subscribe(() => this.render());
  }

  start(): void {
    this.render();
  }

  private async render(): Promise<void> {
    const state = this.store.get();
    this.nav.replaceChildren(...SCREENS
      .filter((s) => s === "inventory" || state.projectId !== null)
      .map((s) => {
        const b = document.createElement("button");
        b.textContent = SCREEN_LABELS[s];
        b.className = s === state.screen ? "active" : "";
        b.onclick = () => this.store.update({ screen: s });
        return b;
      }));
    const badge = document.createElement("span");
    badge.className = "project-badge";
    badge.textContent = state.projectId ? `proyecto: ${state.projectId}` : "";
    this.nav.appendChild(badge);

    try {
      switch (state.screen) {
        case "inventory":
          await inventoryScreen(this.content, this.api, this.store);
          break;
        case "typology-board":
          await typologyBoardScreen(this.content, this.api, this.store);
          break;
        case "scenarios":
          await scenarioScreen(this.content, this.api, this.store);
          break;
        case "map-view":
          await mapScreen(this.content, this.api, this.store);
          break;
        case "field-entry":
          await fieldEntryScreen(this.content, this.api, this.store);
          break;
        default:
          this.content.replaceChildren(this.placeholder(state.screen));
      }
    } catch (e) {
      const box = document.createElement("div");
      box.className = "error";
      box.textContent = String(e);
      this.content.replaceChildren(box);
    }
  }

  private placeholder(screen: Screen): HTMLElement {
    const div = document.createElement("div");
    div.innerHTML = `<h2>${SCREEN_LABELS[screen]}</h2>
      <p>Use el CLI o la API para este paso; la pantalla llega pronto.</p>`;
    return div;
  }
}
