use std::path::Path;

use orientcount::graph::{generate, load_graph, parse_generator_spec};
use orientcount::{Error, Graph, ImbalanceSeq};

/// A graph from an edge-list file, or from a generator spec when no file of
/// that name exists.
pub fn read_graph(source: &str) -> Result<Graph, Error> {
    let path = Path::new(source);
    if path.is_file() {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Precondition(format!("cannot read {source}: {e}")))?;
        return load_graph(&text);
    }
    let (kind, n, seed) = parse_generator_spec(source)?;
    generate(&kind, n, seed)
}

/// `0` for the zero vector, a file of numbers, or an inline comma list.
pub fn read_imbalance(source: Option<&str>, g: &Graph) -> Result<ImbalanceSeq, Error> {
    let source = source.unwrap_or("0").trim();
    if source == "0" {
        return Ok(ImbalanceSeq::zeros(g.n()));
    }
    let path = Path::new(source);
    let text = if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| Error::Precondition(format!("cannot read {source}: {e}")))?
    } else {
        source.to_string()
    };
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::InvalidImbalance(format!("{t:?} is not a number"))))
        .collect::<Result<Vec<_>, _>>()?;
    let b = ImbalanceSeq::new(values)?;
    b.check_len(g)?;
    Ok(b)
}

/// Arcs written as `j>k` (1-indexed), separated by commas or whitespace.
pub fn read_arcs(spec: &str, g: &Graph) -> Result<Vec<(usize, usize)>, Error> {
    spec.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            let bad = || Error::Precondition(format!("arc {t:?} is not of the form j>k"));
            let (a, b) = t.split_once('>').ok_or_else(bad)?;
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a == 0 || b == 0 || a > g.n() || b > g.n() {
                return Err(Error::Precondition(format!("arc {t:?} has a vertex outside 1..={}", g.n())));
            }
            Ok((a - 1, b - 1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn imbalance_forms() {
        let g = read_graph("k:4").unwrap();
        assert!(read_imbalance(None, &g).unwrap().is_zero());
        assert_eq!(read_imbalance(Some("1,1,-1,-1"), &g).unwrap().values(), &[1.0, 1.0, -1.0, -1.0]);
        assert_eq!(read_imbalance(Some("1 1\n-1 -1"), &g).unwrap().values(), &[1.0, 1.0, -1.0, -1.0]);
        assert!(read_imbalance(Some("1,-1"), &g).is_err());
        assert!(read_imbalance(Some("1,x,-1,0"), &g).is_err());
    }

    #[test]
    fn arcs() {
        let g = read_graph("c:4").unwrap();
        assert_eq!(read_arcs("1>2, 2>3", &g).unwrap(), vec![(0, 1), (1, 2)]);
        assert!(read_arcs("1-2", &g).is_err());
        assert!(read_arcs("1>5", &g).is_err());
    }
}
