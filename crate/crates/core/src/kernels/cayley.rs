use std::collections::HashMap;
use std::collections::VecDeque;

use super::{Kernel, Space};
use crate::ffield::{Mat2, Modulus};

/// The walk g ↦ g·s on the subgroup generated by `S`, with states listed in
/// breadth-first order from the identity.
#[derive(Clone, Debug)]
pub struct CayleyWalk {
    pub elements: Vec<Mat2>,
    pub kernel: Kernel,
}

impl CayleyWalk {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Whether the generated subgroup is all of SL₂(F_p).
    pub fn is_full(&self, p: Modulus) -> bool {
        self.order() == p.sl2_order()
    }
}

/// Breadth-first closure of ⟨S⟩ and the uniform right-multiplication walk on
/// it. Repeated generators carry repeated weight.
pub fn build_cayley(gens: &[Mat2], p: Modulus) -> CayleyWalk {
    assert!(!gens.is_empty(), "empty generator set");
    assert!(
        gens.iter().all(|g| g.modulus() == p),
        "generator modulus differs from {p}"
    );
    let identity = Mat2::identity(p);
    let mut index: HashMap<[u32; 4], usize> = HashMap::new();
    let mut elements = vec![identity];
    index.insert(identity.key(), 0);
    let mut queue = VecDeque::from([0usize]);
    let mut edges: Vec<Vec<usize>> = Vec::new();
    while let Some(i) = queue.pop_front() {
        let g = elements[i];
        let mut out = Vec::with_capacity(gens.len());
        for s in gens {
            let h = g.mul(s).expect("same modulus");
            let j = *index.entry(h.key()).or_insert_with(|| {
                elements.push(h);
                queue.push_back(elements.len() - 1);
                elements.len() - 1
            });
            out.push(j);
        }
        if edges.len() <= i {
            edges.resize(i + 1, Vec::new());
        }
        edges[i] = out;
    }
    let w = 1.0 / gens.len() as f64;
    let rows = edges
        .into_iter()
        .map(|out| out.into_iter().map(|j| (j, w)).collect())
        .collect();
    let space = Space::Sl2 {
        p,
        order: elements.len(),
    };
    let kernel = Kernel::from_rows(space, rows).expect("uniform steps are stochastic");
    let kernel = if kernel.asymmetry() == 0.0 {
        kernel.check_symmetric(0.0).expect("exactly symmetric")
    } else {
        kernel
    };
    CayleyWalk { elements, kernel }
}
