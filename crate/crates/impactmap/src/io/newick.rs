//! Newick serialization of a dendrogram. Leaf labels are measure ids;
//! branch lengths are the height differences between a node and its
//! parent merge.

use impactmap_core::cluster::Dendrogram;

use crate::fmt;

pub fn to_newick(dendrogram: &Dendrogram, leaf_labels: &[String]) -> String {
    assert_eq!(leaf_labels.len(), dendrogram.n_leaves);
    if dendrogram.n_leaves == 0 {
        return ";".to_string();
    }
    if dendrogram.merges.is_empty() {
        return format!("{};", leaf_labels[0]);
    }
    let root = dendrogram.n_leaves + dendrogram.merges.len() - 1;
    let mut out = render(dendrogram, leaf_labels, root);
    out.push(';');
    out
}

fn node_height(dendrogram: &Dendrogram, node: usize) -> f64 {
    if node < dendrogram.n_leaves {
        0.0
    } else {
        dendrogram.merges[node - dendrogram.n_leaves].height
    }
}

fn render(dendrogram: &Dendrogram, labels: &[String], node: usize) -> String {
    if node < dendrogram.n_leaves {
        return labels[node].clone();
    }
    let merge = &dendrogram.merges[node - dendrogram.n_leaves];
    let left = render(dendrogram, labels, merge.left);
    let right = render(dendrogram, labels, merge.right);
    let left_len = merge.height - node_height(dendrogram, merge.left);
    let right_len = merge.height - node_height(dendrogram, merge.right);
    format!(
        "({left}:{},{right}:{})",
        fmt::sig(left_len),
        fmt::sig(right_len)
    )
}
