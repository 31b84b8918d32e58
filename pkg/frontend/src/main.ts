// Browser entry: boot the console against the real DOM and transports.
import { bootBrowser } from "./app.js";

bootBrowser();
