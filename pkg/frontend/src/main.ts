import { ApiClient } from "./api.js";
import { App } from "./app.js";
import { $ } from "./dom.js";

const root = $("#app");
if (root instanceof HTMLElement) {
  void new App(root, new ApiClient()).init();
}
