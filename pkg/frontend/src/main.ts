import { ApiClient, resolveApiBase } from "./api";
import { App } from "./app";

const api = new ApiClient(resolveApiBase(window));
const app = new App(document, api);

app.init().catch((err) => {
  const box = document.querySelector("#error-box");
  if (box) box.textContent = `cannot reach the API at ${api.baseUrl}: ${err}`;
});

// handy in the devtools console
(window as unknown as { app: App }).app = app;
