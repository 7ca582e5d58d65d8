// Entry point: wire the controller to the page. The service base URL
// comes from the ?service= query parameter, defaulting to the play
// service's standard local port.

import { PlayServiceClient } from "./api.js";
import { App } from "./app.js";

export function serviceUrl(location: Location): string {
  const param = new URLSearchParams(location.search).get("service");
  return param ?? `http://${location.hostname || "127.0.0.1"}:8000`;
}

const root = document.getElementById("app");
if (root) {
  new App(new PlayServiceClient(serviceUrl(window.location)), root);
}
