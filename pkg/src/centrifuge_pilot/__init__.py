"""Vision-guided tube handling for a swing-bucket centrifuge.

Buckets are found with a gradient Hough transform, occupancy is read from
colour blobs, and the bucket angle is turned into a gantry pose. Motion is
planned as G-code and run against a simulated controller. Synthetic scenes
with exact ground truth stand in for the camera.
"""

__version__ = "0.1.0"
