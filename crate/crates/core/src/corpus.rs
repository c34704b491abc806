//! A fixed corpus of small connected graphs (at most six vertices) used as an oracle set:
//! every law on them can be enumerated exhaustively. Includes parallel edges and a
//! self-loop. Each graph's boundary is its first and last vertex.

use crate::graph::Graph;

fn complete(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect()
}

fn path(n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|v| (v - 1, v)).collect()
}

fn cycle(n: usize) -> Vec<(usize, usize)> {
    let mut e = path(n);
    e.push((n - 1, 0));
    e
}

fn star(n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|v| (0, v)).collect()
}

fn wheel(n: usize) -> Vec<(usize, usize)> {
    let mut e: Vec<(usize, usize)> = (1..n).map(|v| (0, v)).collect();
    e.extend((1..n).map(|v| (v, if v + 1 < n { v + 1 } else { 1 })));
    e
}

fn bipartite(a: usize, b: usize) -> Vec<(usize, usize)> {
    (0..a)
        .flat_map(|u| (a..a + b).map(move |v| (u, v)))
        .collect()
}

type Entry = (&'static str, usize, Vec<(usize, usize)>);

/// Named corpus graphs.
pub fn small_graphs() -> Vec<(&'static str, Graph)> {
    let spec: Vec<Entry> = vec![
        ("K2", 2, complete(2)),
        ("K3", 3, complete(3)),
        ("K4", 4, complete(4)),
        ("K5", 5, complete(5)),
        ("K6", 6, complete(6)),
        ("P3", 3, path(3)),
        ("P4", 4, path(4)),
        ("P6", 6, path(6)),
        ("C4", 4, cycle(4)),
        ("C5", 5, cycle(5)),
        ("C6", 6, cycle(6)),
        ("star5", 5, star(5)),
        ("star6", 6, star(6)),
        ("wheel5", 5, wheel(5)),
        ("wheel6", 6, wheel(6)),
        ("K2,3", 5, bipartite(2, 3)),
        ("K3,3", 6, bipartite(3, 3)),
        ("diamond", 4, vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]),
        ("paw", 4, vec![(0, 1), (1, 2), (2, 0), (2, 3)]),
        (
            "house",
            5,
            vec![(0, 1), (1, 2), (2, 3), (3, 0), (2, 4), (3, 4)],
        ),
        (
            "bowtie",
            5,
            vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)],
        ),
        ("bull", 5, vec![(0, 1), (1, 2), (2, 0), (1, 3), (2, 4)]),
        (
            "box2x3",
            6,
            vec![(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)],
        ),
        (
            "prism",
            6,
            vec![
                (0, 1),
                (1, 2),
                (2, 0),
                (3, 4),
                (4, 5),
                (5, 3),
                (0, 3),
                (1, 4),
                (2, 5),
            ],
        ),
        ("octahedron", 6, {
            let mut e = complete(6);
            e.retain(|&(u, v)| !(u + 3 == v));
            e
        }),
        ("double-edge", 2, vec![(0, 1), (0, 1)]),
        ("triangle-double", 3, vec![(0, 1), (0, 1), (1, 2), (2, 0)]),
        (
            "theta",
            4,
            vec![(0, 1), (1, 3), (0, 2), (2, 3), (0, 3), (0, 3)],
        ),
        (
            "loop-square",
            4,
            vec![(0, 1), (1, 1), (1, 2), (2, 3), (3, 0)],
        ),
        ("K4-minus", 4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)]),
    ];
    spec.into_iter()
        .map(|(name, n, edges)| {
            let boundary = if n > 1 { vec![0, n - 1] } else { vec![0] };
            (
                name,
                Graph::new(n, edges, boundary).expect("corpus graphs are valid"),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_shape() {
        let c = small_graphs();
        assert!(c.len() >= 25);
        for (name, g) in &c {
            assert!(g.is_connected(), "{name}");
            assert!(g.vertex_count() <= 6, "{name}");
        }
        let octa = &c.iter().find(|(n, _)| *n == "octahedron").unwrap().1;
        assert_eq!(octa.edge_count(), 12);
    }
}
