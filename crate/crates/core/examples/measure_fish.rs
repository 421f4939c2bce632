//! Renders a fish at a known depth, detects it and estimates its length
//! with both lens models.

use std::error::Error;

use catchwise::vision::{
    estimate_length, render_depth, BlobDetector, BoundingBox, CameraIntrinsics, Detector, SceneSpec,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (w, h) = (320, 240);
    let scene = SceneSpec::empty(6.0).with_object("walleye", 1.5, BoundingBox::new(100, 110, 120, 24)?);
    let frame = scene.render_frame(w, h);
    let depth = render_depth(w, h, &scene)?;
    let detections = BlobDetector::new("walleye").detect(0, &frame)?;
    let fish = detections.first().ok_or("nothing detected")?;
    println!("detected {} at {:?}", fish.species, fish.bbox);
    for cam in [CameraIntrinsics::pinhole(400.0, 160.0, 120.0)?, CameraIntrinsics::fisheye(400.0, 160.0, 120.0)?] {
        let est = estimate_length(fish, &depth, &cam)?;
        println!("{:?}: {:.2} cm at {:.2} m", est.method, est.length_cm, est.depth_used_m);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
