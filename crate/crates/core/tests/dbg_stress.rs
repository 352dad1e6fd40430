use stsf::connectivity::*;
use stsf::explore::census;
use stsf::plane_tree::*;

#[test]
fn isolate2() {
    let c = census(7);
    let profile = stsf::surface::Profile::new(vec![1, 2, 4], 5);
    let members = &c[&profile];
    for (i, s) in members.iter().enumerate() {
        if let Err(e) = normalize_spherical(s) {
            println!("member {i} fails: {e}");
            let (p, _) = to_path_like(s).unwrap();
            let t = tree_of_path_like(&p).unwrap();
            println!("  tree: {} nice={}", String::from_utf8_lossy(&t.canonical_code()), is_nice(&t));
            println!("  surface: {:?}", p);
            for (v, (adjl, o)) in t.adj.iter().zip(t.origin.iter()).enumerate() {
                println!("   v{v}: adj={adjl:?} l={} origin={o:?}", t.in_l[v]);
            }
            if !is_nice(&t) {
                println!("  plan: {:?}", make_nice_plan(&t));
            }
            break;
        }
    }
}
