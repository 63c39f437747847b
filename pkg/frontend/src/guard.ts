// Runtime schema guard: the client refuses to render anything the role is
// not entitled to see. Server bugs surface loudly instead of leaking.

const BANNED_EVERYWHERE = ["theta", "weight", "scales", "masks", "mu"];

export function forbiddenKeys(role: string): string[] {
  const banned = [...BANNED_EVERYWHERE];
  if (role === "assistant") banned.push("importance", "personal_calendar");
  return banned;
}

function keyIsBanned(key: string, banned: string[]): boolean {
  const k = key.toLowerCase();
  return banned.some((b) => k === b || k.startsWith(`${b}_`));
}

export function assertNoHiddenState(role: string, doc: unknown): void {
  const banned = forbiddenKeys(role);
  const walk = (node: unknown, path: string): void => {
    if (Array.isArray(node)) {
      node.forEach((item, i) => walk(item, `${path}[${i}]`));
      return;
    }
    if (node && typeof node === "object") {
      for (const [key, value] of Object.entries(node as Record<string, unknown>)) {
        if (keyIsBanned(key, banned)) {
          throw new Error(`hidden state leaked to ${role}: ${path}.${key}`);
        }
        walk(value, `${path}.${key}`);
      }
    }
  };
  walk(doc, "$");
}
