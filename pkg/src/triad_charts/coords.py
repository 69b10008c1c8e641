"""Small container base shared by the chart coordinate types."""
import numpy as np


class Coords:
    """Named view on a (..., n) array; field order is the canonical pairing
    order (all momenta first, then the conjugate positions)."""
    fields = ()
    momenta = ()
    positions = ()

    def __init__(self, **kw):
        missing = set(self.fields) - set(kw)
        if missing:
            raise TypeError(f"missing fields: {sorted(missing)}")
        for k in self.fields:
            setattr(self, k, np.asarray(kw[k]))

    def as_array(self):
        vals = np.broadcast_arrays(*[getattr(self, k) for k in self.fields])
        return np.stack(vals, axis=-1)

    @classmethod
    def from_array(cls, z):
        z = np.asarray(z)
        if z.shape[-1] != len(cls.fields):
            raise ValueError(f"expected last axis {len(cls.fields)}, got {z.shape[-1]}")
        return cls(**{k: z[..., i] for i, k in enumerate(cls.fields)})

    def replace(self, **kw):
        d = {k: getattr(self, k) for k in self.fields}
        d.update(kw)
        return type(self)(**d)

    def __repr__(self):
        body = ", ".join(f"{k}={getattr(self, k)!r}" for k in self.fields)
        return f"{type(self).__name__}({body})"


def angle_mask(cls):
    """Boolean mask over the fields marking angular coordinates."""
    return np.array([k in cls.angles for k in cls.fields])
