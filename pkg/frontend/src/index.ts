import { App } from "./app";

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app mount point");
}
const app = new App(window.location.origin, root);
void app.connect();
