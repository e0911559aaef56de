import { Client } from "./api.js";
import { App } from "./app.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "";

const app = new App(
  new Client(base),
  document.getElementById("nav")!,
  document.getElementById("content")!,
);
app.start();
