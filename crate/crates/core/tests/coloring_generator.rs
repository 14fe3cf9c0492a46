use ndarray::Array2;
use pmfgw::coloring::{
    generate, instance_rng, is_proper, proper_coloring, region_adjacency, sample_instance, voronoi_partition,
    ColoringParams,
};
use pmfgw::DiscreteGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Nearest centroid by brute force over every pixel; ties to the lowest index.
fn nearest(centroids: &[[f64; 2]], h: usize) -> Array2<usize> {
    Array2::from_shape_fn((h, h), |(r, c)| {
        let p = [(c as f64 + 0.5) / h as f64, (r as f64 + 0.5) / h as f64];
        let d: Vec<f64> = centroids.iter().map(|q| (p[0] - q[0]).abs() + (p[1] - q[1]).abs()).collect();
        let best = d.iter().copied().fold(f64::INFINITY, f64::min);
        d.iter().position(|&x| x == best).unwrap()
    })
}

/// Two regions are adjacent when some pair of 4-neighbouring pixels
/// carries their labels; checked over all pixel pairs.
fn adjacent_by_scan(labels: &Array2<usize>, a: usize, b: usize) -> bool {
    let h = labels.nrows();
    let pixels: Vec<(usize, usize)> = (0..h).flat_map(|r| (0..labels.ncols()).map(move |c| (r, c))).collect();
    pixels.iter().any(|&(r1, c1)| {
        pixels.iter().any(|&(r2, c2)| {
            r1.abs_diff(r2) + c1.abs_diff(c2) == 1 && labels[[r1, c1]] == a && labels[[r2, c2]] == b
        })
    })
}

#[test]
fn voronoi_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..30 {
        let k = rng.random_range(1..=10);
        let centroids: Vec<[f64; 2]> = (0..k).map(|_| [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)]).collect();
        assert_eq!(voronoi_partition(&centroids, 16), nearest(&centroids, 16));
    }
    // Equidistant pixel centers belong to the first centroid.
    let labels = voronoi_partition(&[[0.25, 0.5], [0.75, 0.5]], 2);
    assert_eq!(labels, nearest(&[[0.25, 0.5], [0.75, 0.5]], 2));
}

#[test]
fn region_adjacency_matches_pixel_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..10 {
        let inst = sample_instance(&ColoringParams { resolution: 12, ..ColoringParams::default() }, &mut rng).unwrap();
        let g = region_adjacency(&inst.labels).unwrap();
        let m = g.num_nodes();
        for a in 0..m {
            for b in 0..m {
                assert_eq!(g.has_edge(a, b), a != b && adjacent_by_scan(&inst.labels, a, b), "regions {a},{b}");
            }
        }
    }
}

#[test]
fn complete_graph_on_five_nodes_has_no_four_coloring() {
    let edges: Vec<(usize, usize)> = (0..5).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    let k5 = DiscreteGraph::from_edges(Array2::zeros((5, 0)), &edges).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    assert!(proper_coloring(&k5, 4, &mut rng).is_none());
    let colors = proper_coloring(&k5, 5, &mut rng).unwrap();
    assert!(is_proper(&k5, &colors));
}

#[test]
fn generated_images_are_consistent_with_their_graphs() {
    let params = ColoringParams::default().with_seed(24);
    for inst in generate(200, &params).unwrap() {
        let m = inst.graph.num_nodes();
        assert!(is_proper(&inst.graph, &inst.colors));
        for (l, &c) in inst.labels.iter().zip(inst.image.iter()) {
            assert_eq!(inst.colors[*l], c);
        }
        for i in 0..m {
            let row = inst.graph.features().row(i);
            assert_eq!(row.iter().filter(|&&x| x == 1.0).count(), 1);
            assert_eq!(row[inst.colors[i]], 1.0);
        }
    }
}

#[test]
fn instances_depend_only_on_seed_and_index() {
    let params = ColoringParams::default().with_seed(25);
    let batch = generate(12, &params).unwrap();
    let again = sample_instance(&params, &mut instance_rng(25, 7)).unwrap();
    assert_eq!(batch[7].image, again.image);
    assert_eq!(batch[7].graph, again.graph);
    let other = generate(12, &params.clone().with_seed(26)).unwrap();
    assert!(batch.iter().zip(&other).any(|(a, b)| a.image != b.image));
}
