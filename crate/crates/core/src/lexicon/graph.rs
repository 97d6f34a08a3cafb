use super::{FrameId, Lexicon, LexiconError, RelationType};
use std::collections::VecDeque;

/// Kahn's algorithm over the edges of one relation type. Returns the frames
/// left unsorted when the subgraph has a cycle.
pub(super) fn topological_order(
    lex: &Lexicon,
    relation_type: RelationType,
) -> Result<Vec<FrameId>, Vec<FrameId>> {
    let n = lex.frames.len();
    let mut indegree = vec![0usize; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for r in lex.relations.iter().filter(|r| r.relation_type == relation_type) {
        indegree[r.child.0 as usize] += 1;
        children[r.parent.0 as usize].push(r.child.0 as usize);
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = queue.pop_front() {
        order.push(FrameId(i as u32));
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                queue.push_back(c);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n)
            .filter(|&i| indegree[i] > 0)
            .map(|i| FrameId(i as u32))
            .collect())
    }
}

pub(super) fn check_inheritance_acyclic(lex: &Lexicon) -> Result<(), LexiconError> {
    let leftover = match topological_order(lex, RelationType::Inheritance) {
        Ok(_) => return Ok(()),
        Err(leftover) => leftover,
    };
    // Every leftover node has a leftover parent, so walking parents from any of
    // them must revisit a node.
    let in_leftover = |f: FrameId| leftover.contains(&f);
    let mut path = vec![leftover[0]];
    loop {
        let current = *path.last().expect("non-empty path");
        let parent = lex
            .relations
            .iter()
            .find(|r| {
                r.relation_type == RelationType::Inheritance
                    && r.child == current
                    && in_leftover(r.parent)
            })
            .map(|r| r.parent)
            .expect("leftover frame has a leftover parent");
        if let Some(pos) = path.iter().position(|&f| f == parent) {
            let mut cycle: Vec<FrameId> = path[pos..].to_vec();
            cycle.reverse();
            cycle.push(cycle[0]);
            return Err(LexiconError::Cycle(
                cycle
                    .into_iter()
                    .map(|f| lex.frames[f.0 as usize].name.clone())
                    .collect(),
            ));
        }
        path.push(parent);
    }
}
