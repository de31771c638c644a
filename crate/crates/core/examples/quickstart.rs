use spgrid::{bench, quasi, twogrid, Mesh, MeshSpec, NewtonConfig, ProblemId, TwoGridPlan};

fn main() -> spgrid::Result<()> {
    let eps = 1e-4;
    let problem = ProblemId::Ex1.build(eps)?;
    let spec = MeshSpec::bakhvalov(eps, 0, 2.0, 0.4);
    let cfg = NewtonConfig::default();

    // direct Newton solve on 256 intervals
    let mesh = Mesh::build(&spec.with_n(256))?;
    let direct = quasi::solve(&mesh, &problem, &cfg)?;
    println!("{} iterations", direct.iterations);

    // Algorithm 1: N = 16 coarse, n = 256 fine
    let tg = twogrid::algorithm1(&problem, &TwoGridPlan::squared(spec, 16), &cfg)?;
    let (fine, y) = tg.finest();
    let exact = problem.exact().expect("ex1 has a closed form");
    println!("error {:e}", bench::nodal_error(fine, y, Some(&**exact))?);
    Ok(())
}
