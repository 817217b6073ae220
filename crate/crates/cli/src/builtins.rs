//! The `list-builtins` listing.

use qgraph_core::graph::BUILTIN_NAMES;

const CONDITIONS: [(&str, &str); 5] = [
    ("delta_prime", "beta=<x>"),
    ("delta", "sigma=<x>"),
    ("kirchhoff", ""),
    ("anti_kirchhoff", ""),
    ("dirichlet", ""),
];

const POTENTIALS: [(&str, &str); 4] = [
    ("zero", ""),
    ("constant", "<c>"),
    ("piecewise", "<b1,...,bk> <v0,...,vk>"),
    ("sampled", "constant|linear <v0,...,vn>"),
];

pub fn listing() -> String {
    let mut out = String::from("graphs:\n");
    for (name, params) in BUILTIN_NAMES {
        out.push_str(&format!("  {name:<16}{params}\n"));
    }
    out.push_str("conditions (\"all: ...\" or \"<vertex>: ...\"):\n");
    for (name, params) in CONDITIONS {
        out.push_str(&format!("  {name:<16}{params}\n"));
    }
    out.push_str("potentials (\"all: ...\" or \"<edge>: ...\"):\n");
    for (name, params) in POTENTIALS {
        out.push_str(&format!("  {name:<16}{params}\n"));
    }
    out
}

/// The same listing as TOML tables.
pub fn machine_listing() -> String {
    let section = |title: &str, items: &[(&str, &str)]| {
        let mut s = String::new();
        for (name, params) in items {
            s.push_str(&format!("[[{title}]]\nname = {name:?}\nparameters = {params:?}\n\n"));
        }
        s
    };
    let mut out = section("graph", &BUILTIN_NAMES);
    out.push_str(&section("condition", &CONDITIONS));
    out.push_str(&section("potential", &POTENTIALS));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn machine_listing_parses_and_matches() {
        let v: toml::Value = toml::from_str(&machine_listing()).unwrap();
        let graphs = v["graph"].as_array().unwrap();
        assert_eq!(graphs.len(), BUILTIN_NAMES.len());
        for g in graphs {
            assert!(listing().contains(g["name"].as_str().unwrap()));
        }
        assert!(listing().contains("figure1"));
    }
}
