// SMT-LIB2 stdin/stdout driver backed by the z3 WASM build (npm: z3-solver).
//
// Behaves like `z3 -in`: reads commands from stdin, evaluates each complete
// top-level s-expression against one persistent solver context, and writes
// the responses to stdout as they become available.  Exits on stdin EOF or
// an (exit) command.  Resolve the module via NODE_PATH (e.g. `npm root -g`).
"use strict";

// Split the buffer into complete top-level s-expressions plus the unread
// tail; string literals and ;-comments are respected.
function extractCommands(buffer) {
  const commands = [];
  let depth = 0;
  let start = -1;
  let inString = false;
  let inComment = false;
  let consumed = 0;
  for (let i = 0; i < buffer.length; i++) {
    const c = buffer[i];
    if (inComment) {
      if (c === "\n") inComment = false;
      continue;
    }
    if (inString) {
      if (c === '"') inString = false;
      continue;
    }
    if (c === ";") {
      inComment = true;
    } else if (c === '"') {
      inString = true;
    } else if (c === "(") {
      if (depth === 0) start = i;
      depth += 1;
    } else if (c === ")") {
      if (depth > 0) {
        depth -= 1;
        if (depth === 0) {
          commands.push(buffer.slice(start, i + 1));
          consumed = i + 1;
          start = -1;
        }
      } else {
        consumed = i + 1; // stray paren: drop it
      }
    } else if (depth === 0) {
      consumed = i + 1; // whitespace or stray atoms between commands
    }
  }
  return { commands, rest: buffer.slice(Math.max(consumed, 0)) };
}

async function main() {
  const { init } = require("z3-solver");
  const { Z3 } = await init();
  const ctx = Z3.mk_context(Z3.mk_config());

  let pending = "";
  let queue = Promise.resolve();
  let sawExit = false;

  const evalCommand = async (cmd) => {
    if (sawExit) return;
    let out;
    try {
      out = await Z3.eval_smtlib2_string(ctx, cmd);
    } catch (err) {
      out = '(error "' + String(err).replace(/"/g, "'") + '")\n';
    }
    if (out && out.length > 0) process.stdout.write(out);
    if (/^\(\s*exit\s*\)$/.test(cmd.trim())) {
      sawExit = true;
      process.exit(0);
    }
  };

  process.stdin.setEncoding("utf8");
  process.stdin.on("data", (chunk) => {
    pending += chunk;
    const res = extractCommands(pending);
    pending = res.rest;
    for (const cmd of res.commands) {
      queue = queue.then(() => evalCommand(cmd));
    }
  });
  process.stdin.on("end", () => {
    queue = queue.then(() => process.exit(0));
  });
}

main().catch((err) => {
  process.stderr.write("shim failure: " + err + "\n");
  process.exit(3);
});
