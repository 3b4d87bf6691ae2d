#!/usr/bin/env python3
"""Generate the synthetic demo meshes as OBJ files."""

import argparse
from pathlib import Path

from qcdistort.mesh import save_mesh
from qcdistort.synth import bumpy_disk, flat_disk, hemisphere, tetrahedron, wavy_disk


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="demo_meshes", help="output directory")
    parser.add_argument("--size", type=float, default=1.0,
                        help="resolution multiplier (1.0 gives 2k-8k faces)")
    args = parser.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    s = args.size
    meshes = {
        "flat_disk": flat_disk(max(4, round(19 * s))),
        "wavy_disk": wavy_disk(max(50, round(1100 * s * s))),
        "hemisphere": hemisphere(max(4, round(28 * s))),
        "bumpy_disk": bumpy_disk(max(50, round(4200 * s * s))),
        "tetrahedron": tetrahedron(),
    }
    for name, mesh in meshes.items():
        path = out / f"{name}.obj"
        save_mesh(mesh, path)
        print(f"{path}  ({mesh.n_vertices} vertices, {mesh.n_faces} faces)")


if __name__ == "__main__":
    main()
