/** Entry point: pick the server address and hand over to the console. */

import { runConsole, serverAddress } from "./console.js";

const code = await runConsole({ server: serverAddress(process.argv.slice(2), process.env) });
process.exit(code);
