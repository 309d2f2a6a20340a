r"""Layouts for the public datasets used to study triple decomposition.

None of these datasets ship with the package. This script describes the
layout each loader expects and, when given a path, loads the data, prints
its shape and runs a short decomposition or recovery on it.

Abilene traffic
    The Abilene backbone traffic matrices have 12 origins, 12 destinations
    and one matrix per five minutes. Arrange one day or one week as a
    12 x 12 x T tensor and save it with ``tridecomp.io.save_tns3``. If you
    start from a T x 144 array (one flattened matrix per row, origin
    fastest), ``arr.T.reshape(12, 12, T, order="F")`` gives the tensor.
    Sweep the rank with::

        tridecomp rank-sweep --input abilene.tns3 --ranks 1:6 --out-curve curve.csv

ORL faces
    The ORL (AT&T) face database contains 40 subjects, each with ten 112 x 92
    greyscale PGM files named ``1.pgm`` to ``10.pgm`` in a folder ``sN``.
    Pointing the loader at one subject folder gives a 112 x 92 x 10 tensor
    with values in [0, 1]::

        tridecomp sample --input orl/s1 --fraction 0.5 --out s1_obs.csv
        tridecomp recover --observed s1_obs.csv --dims 112 92 10 --rank 10 \
            --out-tensor s1_rec.tns3 --truth orl/s1

McGill colour images
    Colour photographs are resized to 150 x 200 and stored with one PGM file
    per channel in one folder, named so they sort as red, green, blue (for
    example ``1_red.pgm``, ``2_green.pgm``, ``3_blue.pgm``). The folder
    loads as a 150 x 200 x 3 tensor. The resampling used to build the
    resized images changes the numbers, so choose one method and keep it.

Run with ``python demos/external_datasets.py [dataset-path] [rank]``.
"""

import sys

from tridecomp import SolverConfig, mals_decompose, mals_recover, relative_error, sample_mask
from tridecomp.io import load_tensor

if len(sys.argv) < 2:
    print(__doc__)
    sys.exit(0)

X = load_tensor(sys.argv[1])
rank = int(sys.argv[2]) if len(sys.argv) > 2 else 3
print("loaded", sys.argv[1], "with shape", X.shape)

cfg = SolverConfig(rank=rank, restarts=2)
_, trace = mals_decompose(X, cfg)
print(f"full decomposition at rank {rank}: relative error {trace.relative_error:.4f}")

state = mals_recover(sample_mask(X, 0.5, seed=0), cfg)
print(f"recovery from half the entries: relative error {relative_error(state.X, X):.4f}")
