import { ApiClient } from "./api.js";
import { ReviewController } from "./controller.js";

const root = document.getElementById("app");
if (root) {
  void new ReviewController(new ApiClient(), root).start();
}
