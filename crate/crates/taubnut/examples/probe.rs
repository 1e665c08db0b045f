use std::time::Instant;
use taubnut::catalog;
use taubnut::curvature;
use taubnut::expr::Expr;
use taubnut::atom::Atom;

fn main() {
    let model = catalog::taub_nut(Expr::atom(Atom::M), Expr::atom(Atom::L), 1).unwrap();
    let t0 = Instant::now();
    let cc = curvature::christoffel_curvature(&model.metric).unwrap();
    eprintln!("coordinate pipeline: {:?}, einstein zero: {}", t0.elapsed(), cc.einstein_is_zero());

    let tet = catalog::nut_tetrad().unwrap();
    let t1 = Instant::now();
    let b = curvature::CurvatureBundle::build(tet).unwrap();
    let ez = b.einstein.iter().all(|row| row.iter().all(|e| e.is_zero()));
    eprintln!("frame pipeline: {:?}, einstein zero: {}, scalar zero: {}", t1.elapsed(), ez, b.scalar.is_zero());
    let t2 = Instant::now();
    let k = b.kretschmann();
    eprintln!("kretschmann frame: {:?}: {}", t2.elapsed(), k);
}
