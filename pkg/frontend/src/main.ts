import { bootstrap } from "./app.js";

bootstrap("app", "");
