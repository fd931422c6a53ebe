//! Plain-text instance formats.
//!
//! All formats are UTF-8, one record per line, with `#` comments and blank
//! lines ignored.
//!
//! * Ising: `i j J` coupling lines and `field i h` lines (0-based spins).
//! * Graph: DIMACS-style `p edge n m`, `e u v` (1-based vertices), plus a
//!   `colors k` header line; `c` lines are comments as in DIMACS.
//! * TSP: one `x y` coordinate pair per line.
//! * Rastrigin: `rastrigin dim [lo hi]` and an optional `step s`.
//! * Barrier chain: `site i cost` lines for every site and an optional `start i`.

use super::{BarrierLandscape, BoxDomain, Coupling, GraphInstance, Instance, IsingInstance, Rastrigin, TspInstance};
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

const DEFAULT_RASTRIGIN_STEP: f64 = 0.5;

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line.split_whitespace().collect()))
        }
    })
}

fn num<T: FromStr>(line: usize, token: &str) -> Result<T> {
    token.parse().map_err(|_| Error::Parse { line, message: format!("cannot parse `{token}`") })
}

fn arity(line: usize, tokens: &[&str], expected: usize) -> Result<()> {
    if tokens.len() == expected {
        Ok(())
    } else {
        Err(Error::Parse { line, message: format!("expected {expected} fields, found {}", tokens.len()) })
    }
}

/// Parses an instance, detecting its kind from the first record.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let Some((line, first)) = records(text).find(|(_, t)| t[0] != "c") else {
        return Err(Error::Parse { line: 0, message: "empty instance file".into() });
    };
    match first[0] {
        "p" | "colors" | "e" => parse_graph(text).map(Instance::Graph),
        "field" => parse_ising(text).map(Instance::Ising),
        "rastrigin" | "step" => parse_rastrigin(text).map(Instance::Rastrigin),
        "site" | "start" => parse_barrier(text).map(Instance::Barrier),
        _ => match first.len() {
            3 => parse_ising(text).map(Instance::Ising),
            2 => parse_tsp(text).map(Instance::Tsp),
            _ => Err(Error::Parse { line, message: "unrecognised instance format".into() }),
        },
    }
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn write_instance(path: impl AsRef<Path>, instance: &Instance) -> Result<()> {
    std::fs::write(path, format_instance(instance))?;
    Ok(())
}

pub fn parse_ising(text: &str) -> Result<IsingInstance> {
    let mut couplings = Vec::new();
    let mut fields: Vec<(usize, f64)> = Vec::new();
    let mut n = 0;
    for (line, t) in records(text) {
        if t[0] == "field" {
            arity(line, &t, 3)?;
            let i: usize = num(line, t[1])?;
            fields.push((i, num(line, t[2])?));
            n = n.max(i + 1);
        } else {
            arity(line, &t, 3)?;
            let (a, b): (usize, usize) = (num(line, t[0])?, num(line, t[1])?);
            if a == b {
                return Err(Error::Parse { line, message: format!("self-coupling on spin {a}") });
            }
            couplings.push(Coupling { i: a.min(b), j: a.max(b), strength: num(line, t[2])? });
            n = n.max(a.max(b) + 1);
        }
    }
    let mut h = vec![0.0; n];
    for (i, v) in fields {
        h[i] += v;
    }
    IsingInstance::new(n, couplings, h)
}

pub fn parse_graph(text: &str) -> Result<GraphInstance> {
    let mut header: Option<(usize, usize)> = None;
    let mut k = None;
    let mut edges = Vec::new();
    for (line, t) in records(text) {
        match t[0] {
            "c" => {}
            "p" => {
                arity(line, &t, 4)?;
                if t[1] != "edge" && t[1] != "col" {
                    return Err(Error::Parse { line, message: format!("unknown problem type `{}`", t[1]) });
                }
                header = Some((num(line, t[2])?, num(line, t[3])?));
            }
            "colors" => {
                arity(line, &t, 2)?;
                k = Some(num(line, t[1])?);
            }
            "e" => {
                arity(line, &t, 3)?;
                let (u, v): (usize, usize) = (num(line, t[1])?, num(line, t[2])?);
                if u == 0 || v == 0 || u == v {
                    return Err(Error::Parse { line, message: format!("invalid edge {u} {v} (vertices are 1-based)") });
                }
                edges.push(((u - 1).min(v - 1), (u - 1).max(v - 1)));
            }
            other => return Err(Error::Parse { line, message: format!("unknown record `{other}`") }),
        }
    }
    let (n, m) = header.ok_or(Error::Parse { line: 0, message: "missing `p edge n m` header".into() })?;
    let k = k.ok_or(Error::Parse { line: 0, message: "missing `colors k` header".into() })?;
    if m != edges.len() {
        return Err(Error::Parse { line: 0, message: format!("header declares {m} edges, found {}", edges.len()) });
    }
    GraphInstance::new(n, edges, k)
}

pub fn parse_tsp(text: &str) -> Result<TspInstance> {
    let mut cities = Vec::new();
    for (line, t) in records(text) {
        arity(line, &t, 2)?;
        cities.push((num(line, t[0])?, num(line, t[1])?));
    }
    TspInstance::new(cities)
}

pub fn parse_rastrigin(text: &str) -> Result<Rastrigin> {
    let mut domain = None;
    let mut step = DEFAULT_RASTRIGIN_STEP;
    for (line, t) in records(text) {
        match t[0] {
            "rastrigin" if t.len() == 2 => domain = Some(BoxDomain::rastrigin(num(line, t[1])?)?),
            "rastrigin" => {
                arity(line, &t, 4)?;
                domain = Some(BoxDomain::new(num(line, t[1])?, num(line, t[2])?, num(line, t[3])?)?);
            }
            "step" => {
                arity(line, &t, 2)?;
                step = num(line, t[1])?;
            }
            other => return Err(Error::Parse { line, message: format!("unknown record `{other}`") }),
        }
    }
    let domain = domain.ok_or(Error::Parse { line: 0, message: "missing `rastrigin dim` record".into() })?;
    Rastrigin::new(domain, step)
}

pub fn parse_barrier(text: &str) -> Result<BarrierLandscape> {
    let mut sites: Vec<(usize, f64)> = Vec::new();
    let mut start = None;
    for (line, t) in records(text) {
        match t[0] {
            "site" => {
                arity(line, &t, 3)?;
                sites.push((num(line, t[1])?, num(line, t[2])?));
            }
            "start" => {
                arity(line, &t, 2)?;
                start = Some(num(line, t[1])?);
            }
            other => return Err(Error::Parse { line, message: format!("unknown record `{other}`") }),
        }
    }
    sites.sort_by_key(|&(i, _)| i);
    if sites.iter().enumerate().any(|(k, &(i, _))| k != i) {
        return Err(Error::Parse { line: 0, message: "sites must cover 0..L exactly once".into() });
    }
    BarrierLandscape::new(sites.into_iter().map(|(_, c)| c).collect())?.with_start(start)
}

/// Serializes an instance; `parse_instance` reads it back to an identical instance.
pub fn format_instance(instance: &Instance) -> String {
    let mut out = String::new();
    match instance {
        Instance::Ising(p) => {
            let _ = writeln!(out, "# ising spins={} couplings={}", p.n(), p.couplings().len());
            for (i, h) in p.fields().iter().enumerate() {
                let _ = writeln!(out, "field {i} {h}");
            }
            for c in p.couplings() {
                let _ = writeln!(out, "{} {} {}", c.i, c.j, c.strength);
            }
        }
        Instance::Graph(g) => {
            let _ = writeln!(out, "p edge {} {}", g.n(), g.edges().len());
            let _ = writeln!(out, "colors {}", g.k());
            for &(u, v) in g.edges() {
                let _ = writeln!(out, "e {} {}", u + 1, v + 1);
            }
        }
        Instance::Tsp(t) => {
            let _ = writeln!(out, "# tsp cities={}", t.n());
            for (x, y) in t.cities() {
                let _ = writeln!(out, "{x} {y}");
            }
        }
        Instance::Rastrigin(r) => {
            let d = r.domain();
            let _ = writeln!(out, "rastrigin {} {} {}", d.dim, d.lo, d.hi);
            let _ = writeln!(out, "step {}", r.step());
        }
        Instance::Barrier(b) => {
            let _ = writeln!(out, "# barrier sites={}", b.len());
            if let Some(s) = b.start() {
                let _ = writeln!(out, "start {s}");
            }
            for (i, c) in b.costs().iter().enumerate() {
                let _ = writeln!(out, "site {i} {c}");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{
        barrier_landscape, planted_coloring_instance, random_ising, random_tsp, BarrierProfile, CouplingDistribution,
        Topology,
    };
    use crate::rng_from_seed;

    fn roundtrip(inst: &Instance) -> Instance {
        let text = format_instance(inst);
        let back = parse_instance(&text).unwrap();
        assert_eq!(format_instance(&back), text);
        back
    }

    #[test]
    fn every_format_roundtrips() {
        let ising = random_ising(9, Topology::Grid2d, CouplingDistribution::Gaussian, &mut rng_from_seed(1)).unwrap();
        let Instance::Ising(back) = roundtrip(&Instance::Ising(ising.clone())) else { panic!() };
        assert_eq!(back.couplings(), ising.couplings());
        let (g, _) = planted_coloring_instance(12, 3, 0.5, &mut rng_from_seed(2)).unwrap();
        let Instance::Graph(back) = roundtrip(&Instance::Graph(g.clone())) else { panic!() };
        assert_eq!(back.edges(), g.edges());
        roundtrip(&Instance::Tsp(random_tsp(7, &mut rng_from_seed(3)).unwrap()));
        roundtrip(&Instance::Rastrigin(Rastrigin::new(BoxDomain::rastrigin(4).unwrap(), 0.3).unwrap()));
        let Instance::Barrier(b) =
            roundtrip(&Instance::Barrier(barrier_landscape(BarrierProfile::ThinTall, 2, 1, 6.0, 0.5).unwrap()))
        else {
            panic!()
        };
        assert_eq!(b.start(), Some(4));
    }

    #[test]
    fn ising_text_with_comments() {
        let text = "# two spins\n0 1 1.0\n\nfield 1 -0.5  # trailing\n";
        let inst = parse_ising(text).unwrap();
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.fields(), &[0.0, -0.5]);
        assert!(matches!(parse_instance("0 1 x\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn dimacs_graph() {
        let text = "c triangle\np edge 3 3\ncolors 2\ne 1 2\ne 1 3\ne 2 3\n";
        let Instance::Graph(g) = parse_instance(text).unwrap() else { panic!("not a graph") };
        assert_eq!((g.n(), g.k()), (3, 2));
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2)]);
        assert!(parse_graph("p edge 3 1\ne 1 2\n").is_err());
        assert!(parse_graph("p edge 3 2\ncolors 2\ne 1 2\n").is_err());
        assert!(parse_graph("p edge 3 1\ncolors 2\ne 0 2\n").is_err());
    }
}
