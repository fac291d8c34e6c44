//! Pose composition, relative poses and the analytic Jacobians.

use npgraph::se2::{jacobians_between, jacobians_to_local, normalize_angle};
use npgraph::{Point2, Pose2};

fn main() {
    let a = Pose2::new(1.0, 2.0, 0.5);
    let b = Pose2::new(-0.5, 3.0, 3.0);
    let delta = a.between(&b);
    println!("a        = {a:?}");
    println!("b        = {b:?}");
    println!("a^-1 b   = {delta:?}");
    println!("a (+) d  = {:?}", a.compose(&delta));
    println!("wrap(7)  = {:.6}", normalize_angle(7.0));

    let p = Point2::new(2.0, 2.5);
    let local = a.to_local(&p);
    println!("p in a   = {local:?}, back = {:?}", a.to_global(&local));

    let (ja, jb) = jacobians_between(&a, &b);
    println!("d between / d a =\n{ja:.4}");
    println!("d between / d b =\n{jb:.4}");
    let (jx, jp) = jacobians_to_local(&a, &p);
    println!("d local / d pose =\n{jx:.4}");
    println!("d local / d point =\n{jp:.4}");
}
