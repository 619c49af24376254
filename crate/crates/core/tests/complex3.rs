use std::collections::HashMap;
use std::path::Path;

use quantum3::complex3::{
    count_admissible, enumerate_admissible, load_triangulation, merge_coloring, normal_surface_euler_parity,
    split_coloring, Coloring, Triangulation,
};

fn asset(name: &str) -> Triangulation {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets").join(name);
    load_triangulation(std::fs::File::open(p).unwrap()).unwrap()
}

fn boundary_4simplex() -> Triangulation {
    let mut tets = Vec::new();
    for skip in 0..5 {
        let v: Vec<usize> = (0..5).filter(|&x| x != skip).collect();
        tets.push([v[0], v[1], v[2], v[3]]);
    }
    Triangulation::from_tetrahedra(&tets).unwrap()
}

fn face_ok(a: u32, b: u32, c: u32, r: u32) -> bool {
    (a + b + c) % 2 == 0 && a <= b + c && b <= a + c && c <= a + b && a + b + c <= 2 * r - 4
}

/// Every map E -> {0..r-2}, kept when all triangles pass the admissibility test.
fn brute_force(t: &Triangulation, r: u32) -> u64 {
    let n = t.edges().len();
    let total = ((r - 1) as u64).pow(n as u32);
    let index: HashMap<[usize; 2], usize> = t.edges().iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let faces: Vec<[usize; 3]> = t
        .faces()
        .iter()
        .map(|f| {
            let e = |a: usize, b: usize| index[&[a.min(b), a.max(b)]];
            [e(f[0], f[1]), e(f[1], f[2]), e(f[0], f[2])]
        })
        .collect();
    (0..total)
        .filter(|&code| {
            let mut x = code;
            let colors: Vec<u32> = (0..n)
                .map(|_| {
                    let c = (x % (r - 1) as u64) as u32;
                    x /= (r - 1) as u64;
                    c
                })
                .collect();
            faces.iter().all(|f| face_ok(colors[f[0]], colors[f[1]], colors[f[2]], r))
        })
        .count() as u64
}

#[test]
fn backtracking_matches_brute_force() {
    let t = boundary_4simplex();
    for r in 3..=5 {
        assert_eq!(count_admissible(&t, r, false).unwrap(), brute_force(&t, r), "r={r}");
    }
}

#[test]
fn disjoint_union_multiplies_counts() {
    let t = boundary_4simplex();
    let u = t.disjoint_union(&t);
    for r in [3, 4, 5] {
        let n = count_admissible(&t, r, false).unwrap();
        assert_eq!(count_admissible(&u, r, false).unwrap(), n * n);
    }
}

#[test]
fn split_is_a_bijection() {
    let t = boundary_4simplex();
    for r in [5, 7] {
        let full = count_admissible(&t, r, false).unwrap();
        assert_eq!(full, count_admissible(&t, 3, false).unwrap() * count_admissible(&t, r, true).unwrap());
    }
    let mut seen = std::collections::HashSet::new();
    for c in enumerate_admissible(&t, 7, false).unwrap() {
        let (c3, cp) = split_coloring(&c).unwrap();
        assert!(c3.is_admissible(&t) && cp.is_admissible(&t));
        assert!(cp.colors.iter().all(|x| x % 2 == 0));
        assert_eq!(merge_coloring(&c3, &cp).unwrap(), c);
        assert!(seen.insert((c3.colors, cp.colors)));
    }
    assert_eq!(seen.len() as u64, count_admissible(&t, 7, false).unwrap());
}

/// Euler characteristic of the normal surface built disc by disc: one vertex per
/// edge colored 1, one arc per face side shared by two discs, one disc per tetrahedron.
fn assembled_euler(t: &Triangulation, c3: &Coloring) -> i64 {
    let mut arcs: HashMap<usize, usize> = HashMap::new();
    let mut vertices = std::collections::HashSet::new();
    let mut discs = 0i64;
    for ti in 0..t.tetrahedra().len() {
        let edges = t.tet_edges(ti);
        let hot: Vec<usize> = edges.iter().copied().filter(|&e| c3.colors[e] == 1).collect();
        if hot.is_empty() {
            continue;
        }
        assert!(hot.len() == 3 || hot.len() == 4, "not a normal disc");
        discs += 1;
        vertices.extend(hot.iter().copied());
        for f in t.tet_faces(ti) {
            if t.face_edges()[f].iter().any(|&e| c3.colors[e] == 1) {
                *arcs.entry(f).or_default() += 1;
            }
        }
    }
    assert!(arcs.values().all(|&k| k == 2), "surface is not closed");
    vertices.len() as i64 - arcs.len() as i64 + discs
}

#[test]
fn normal_surface_parity_matches_assembly() {
    for t in [boundary_4simplex(), asset("s2xs1.json")] {
        let mut n = 0;
        for c3 in enumerate_admissible(&t, 3, false).unwrap() {
            let chi = assembled_euler(&t, &c3);
            assert_eq!(normal_surface_euler_parity(&t, &c3).unwrap() as i64, chi.rem_euclid(2));
            n += 1;
        }
        assert!(n > 1);
    }
}

#[test]
fn assets_are_closed_manifolds() {
    let s3 = asset("s3_boundary4simplex.json");
    assert!(s3.is_manifold());
    assert_eq!((s3.vertex_count(), s3.edges().len(), s3.faces().len(), s3.tetrahedra().len()), (5, 10, 10, 5));
    let p = asset("s2xs1.json");
    assert!(p.is_manifold());
    assert_eq!(p.components().len(), 1);
    let chi = p.vertex_count() as i64 - p.edges().len() as i64 + p.faces().len() as i64 - p.tetrahedra().len() as i64;
    assert_eq!(chi, 0);
    let back = load_triangulation(p.to_json().as_bytes()).unwrap();
    assert_eq!(back.tetrahedra(), p.tetrahedra());
}

#[test]
fn rejects_bad_input() {
    assert!(Triangulation::from_tetrahedra(&[[0, 1, 2, 3], [0, 1, 2, 3]]).is_err());
    assert!(load_triangulation("not json".as_bytes()).is_err());
    assert!(enumerate_admissible(&boundary_4simplex(), 2, false).is_err());
}
