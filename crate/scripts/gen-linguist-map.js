// Regenerates crates/core/data/linguist.map from the `linguist-languages`
// npm package (MIT, data extracted from GitHub Linguist).
//
//   npm pack linguist-languages && tar xzf linguist-languages-*.tgz
//   node scripts/gen-linguist-map.js package > crates/core/data/linguist.map

const path = require("path");
const pkgDir = path.resolve(process.argv[2] || "package");
const pkg = require(path.join(pkgDir, "package.json"));
const langs = require(pkgDir);

// Fixed resolutions for the classic ambiguous extensions.
const PINNED = {
  ".h": "C", ".m": "Objective-C", ".pl": "Perl",
  ".rs": "Rust", ".html": "HTML", ".md": "Markdown", ".sql": "SQL",
  ".txt": "Text", ".yaml": "YAML", ".f": "Fortran", ".for": "Fortran",
  ".fcgi": "Python", ".v": "Verilog", ".cfg": "INI", ".inc": "PHP",
  ".cl": "Common Lisp", ".sc": "Scala", ".e": "Eiffel",
  ".plist": "XML Property List", ".bas": "Visual Basic 6.0", ".es": "JavaScript",
};
const TYPE_RANK = { programming: 0, markup: 1, data: 2, prose: 3 };

const names = Object.keys(langs).map((k) => langs[k].name).sort();
const byName = {};
for (const k of Object.keys(langs)) byName[langs[k].name] = langs[k];

const extClaims = new Map();
const fileClaims = new Map();
for (const name of names) {
  const lang = byName[name];
  (lang.extensions || []).forEach((ext, i) => {
    const key = ext.toLowerCase();
    if (!extClaims.has(key)) extClaims.set(key, []);
    const claims = extClaims.get(key);
    if (!claims.some((c) => c.name === name)) claims.push({ name, primary: i === 0, type: lang.type });
  });
  for (const f of lang.filenames || []) {
    if (!fileClaims.has(f)) fileClaims.set(f, []);
    fileClaims.get(f).push({ name, primary: false, type: lang.type });
  }
}

function winner(claims) {
  return claims.slice().sort((a, b) =>
    (b.primary - a.primary) ||
    (TYPE_RANK[a.type] ?? 9) - (TYPE_RANK[b.type] ?? 9) ||
    (a.name < b.name ? -1 : a.name > b.name ? 1 : 0))[0].name;
}

const out = [];
out.push(`# Extension/filename -> language map derived from GitHub Linguist`);
out.push(`# source: linguist-languages ${pkg.version} (MIT)`);
out.push(`# format: ext <extension> <language> | file <filename> <language> | override <extension> <language>`);
out.push("");
for (const name of names) {
  const lang = byName[name];
  const rules = [];
  for (const ext of lang.extensions || []) {
    const key = ext.toLowerCase();
    if (!rules.includes(`ext ${key} ${name}`)) rules.push(`ext ${key} ${name}`);
  }
  for (const f of lang.filenames || []) {
    if (/\s/.test(f)) continue;
    if (winner(fileClaims.get(f)) === name) rules.push(`file ${f} ${name}`);
  }
  if (rules.length === 0) continue;
  out.push(`# ${name}`);
  out.push(...rules);
}
out.push("");
out.push("# extensions claimed by more than one language");
for (const key of [...extClaims.keys()].sort()) {
  const claims = extClaims.get(key);
  if (claims.length < 2) continue;
  out.push(`override ${key} ${PINNED[key] || winner(claims)}`);
}
process.stdout.write(out.join("\n") + "\n");
