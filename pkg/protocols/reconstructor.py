"""Non-interactive reconstruction of both refresh views.

Given old shares (L, R), new shares (L', R') with the same inner product and
common randomness (V, V~) sampled offline from (F \\ {0})^n:
  P_L: A  = V * L,            X~ = L' - L,  A~ = V~^-1 * X~
  P_R: X  = R' - R,  B = V^-1 * X,          B~ = V~ * R'
No message is exchanged.
"""

from dataclasses import dataclass

from lrs.encoding import Encoding
from lrs.field import NonZeroVector, hadamard, inner_product, sample_nonzero_vector, uncounted, vec_inv, vec_sub
from lrs.rng import SeededRng
from models.schemas import FieldParams
from protocols.refresh import ViewL, ViewR
from utils.errors import DomainError, PreconditionError


@dataclass(frozen=True)
class CommonRandomness:
    V: NonZeroVector
    V_tilde: NonZeroVector

    def __post_init__(self):
        if not isinstance(self.V, NonZeroVector) or not isinstance(self.V_tilde, NonZeroVector):
            raise DomainError("common randomness must have nonzero coordinates")


def sample_common_randomness(params: FieldParams, rng: SeededRng) -> CommonRandomness:
    return CommonRandomness(sample_nonzero_vector(rng, params), sample_nonzero_vector(rng, params))


class ReconstructRefresh:
    def _check(self, old: Encoding, new: Encoding, cr: CommonRandomness) -> None:
        if old.params.p != new.params.p or old.params.n != new.params.n:
            raise DomainError("old and new encodings live over different parameters")
        cr.V.check_params(old.params)
        cr.V_tilde.check_params(old.params)
        with uncounted():
            before, after = inner_product(old.L, old.R), inner_product(new.L, new.R)
        if before != after:
            raise PreconditionError(
                f"inner products differ: <L,R>={before.value} <L',R'>={after.value}"
            )

    def left_view(self, old: Encoding, new: Encoding, cr: CommonRandomness) -> ViewL:
        A = hadamard(cr.V, old.L)
        X_tilde = vec_sub(new.L, old.L)
        A_tilde = hadamard(vec_inv(cr.V_tilde), X_tilde)
        return ViewL(old.L, A.nonzero(), cr.V, A_tilde, cr.V_tilde)

    def right_view(self, old: Encoding, new: Encoding, cr: CommonRandomness) -> ViewR:
        X = vec_sub(new.R, old.R)
        B = hadamard(vec_inv(cr.V), X)
        B_tilde = hadamard(cr.V_tilde, new.R)
        return ViewR(old.R, B, cr.V, B_tilde.nonzero(), cr.V_tilde)

    def reconstruct(self, old: Encoding, new: Encoding, cr: CommonRandomness) -> tuple[ViewL, ViewR]:
        self._check(old, new, cr)
        return self.left_view(old, new, cr), self.right_view(old, new, cr)


def check_reconstruction_constraints(view_L: ViewL, view_R: ViewR) -> bool:
    """True iff the implied (A, A~, B, B~) satisfy C1-C3."""
    A, A_tilde, B, B_tilde = view_L.A, view_L.A_tilde, view_R.B, view_R.B_tilde
    if len({len(A), len(A_tilde), len(B), len(B_tilde)}) != 1 or len({A.p, A_tilde.p, B.p, B_tilde.p}) != 1:
        return False
    if not A.is_nonzero() or not B_tilde.is_nonzero():
        return False
    with uncounted():
        return (inner_product(A, B) + inner_product(A_tilde, B_tilde)).value == 0


reconstructor = ReconstructRefresh()


def reconstruct(old: Encoding, new: Encoding, cr: CommonRandomness) -> tuple[ViewL, ViewR]:
    return reconstructor.reconstruct(old, new, cr)
