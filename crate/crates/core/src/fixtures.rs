//! The bundled three-node instance.
//!
//! The dense files are printed to four decimals; loading them goes through
//! the relaxed tolerance and a row renormalization.

use crate::format::{parse_edgelist_str, parse_matrix_str};
use crate::stochmat::{AffinityMatrix, StochasticMatrix};

pub const THREE_NODE_P: &str = include_str!("../fixtures/three_node_P.csv");
pub const THREE_NODE_Y: &str = include_str!("../fixtures/three_node_Y.csv");
pub const THREE_NODE_J: &str = include_str!("../fixtures/three_node_J.csv");
pub const THREE_NODE_EDGES: &str = include_str!("../fixtures/three_node_edges.txt");

fn load(text: &str) -> StochasticMatrix {
    let m = parse_matrix_str(text).expect("bundled fixture parses");
    StochasticMatrix::ingest_rounded(m).expect("bundled fixture is stochastic within 5e-4")
}

/// Transition matrix as printed, renormalized.
pub fn p() -> StochasticMatrix {
    load(THREE_NODE_P)
}

pub fn y() -> StochasticMatrix {
    load(THREE_NODE_Y)
}

pub fn j() -> StochasticMatrix {
    load(THREE_NODE_J)
}

/// Affinity matrix `[[0,5,3],[5,0,8],[3,8,0]]`.
pub fn affinity() -> AffinityMatrix {
    parse_edgelist_str(THREE_NODE_EDGES, true, None).expect("bundled edge list parses")
}

/// Printed 4-decimal powers of `P`: `P^2` and `P^3`.
pub const P_SQUARED: [[f64; 3]; 3] = [[0.3427, 0.2727, 0.3846], [0.1678, 0.6879, 0.1442], [0.2797, 0.1705, 0.5498]];
pub const P_CUBED: [[f64; 3]; 3] = [[0.2098, 0.4939, 0.2963], [0.3039, 0.2098, 0.4863], [0.2155, 0.5747, 0.2098]];

/// Printed rows of the limit of `P^n`.
pub const LIMIT_ROW: [f64; 3] = [0.2500, 0.4062, 0.3437];

/// Printed transition matrix before renormalization.
pub const P_PRINTED: [[f64; 3]; 3] = [[0.0, 0.6250, 0.3750], [0.3846, 0.0, 0.6154], [0.2727, 0.7273, 0.0]];
