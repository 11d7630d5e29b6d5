# -*- coding: utf-8 -*-
"""The Hilbert space module

Dense finite-dimensional states and operators, Lindblad models and their embedding
into the doubled Hilbert space H + H.

Basis convention for the two-level atom: index 0 is the ground state, index 1 the
excited state. Rates are in units of gamma (gamma = 1 unless a model says otherwise).
"""
import numpy as np
from scipy import linalg

from .commons import complex_array

__all__ = ['Ket', 'Operator', 'LindbladModel', 'DoubledState', 'DensityMatrix',
           'extend_model', 'restrict_model', 'make_theta', 'projector', 'braket',
           'two_level_builders', 'decay_model', 'fluorescence_model', 'decay_element_kets',
           'random_ket', 'random_model']

NORM_TOLERANCE = 1e-12
HERMITIAN_TOLERANCE = 1e-12


class Ket(object):
    """A state vector, normalized or not"""
    def __init__(self, amplitudes, normalized=False):
        amplitudes = np.array(amplitudes, dtype=complex)
        if amplitudes.ndim != 1 or amplitudes.size < 1:
            raise ValueError('A ket needs a non-empty one dimensional amplitude list, got shape %s'
                             % (amplitudes.shape,))

        if normalized and abs(np.vdot(amplitudes, amplitudes).real - 1) > NORM_TOLERANCE:
            raise ValueError('Ket flagged as normalized has squared norm %r'
                             % np.vdot(amplitudes, amplitudes).real)

        amplitudes.setflags(write=False)
        self._amplitudes = amplitudes
        self._normalized = normalized

    @classmethod
    def from_vector(cls, vector):
        return cls(vector)

    @classmethod
    def normalize(cls, amplitudes):
        """Build a normalized ket pointing along `amplitudes`"""
        amplitudes = np.array(amplitudes, dtype=complex)
        norm = np.linalg.norm(amplitudes)
        if norm == 0:
            raise ValueError('Cannot normalize a zero-norm vector')

        return cls(amplitudes / norm, normalized=True)

    @property
    def amplitudes(self):
        return self._amplitudes

    @property
    def vector(self):
        return self._amplitudes

    @property
    def dim(self):
        return self._amplitudes.size

    @property
    def normalized(self):
        return self._normalized

    @property
    def norm(self):
        return float(np.linalg.norm(self._amplitudes))

    def __repr__(self):
        return 'Ket(%r)' % (self._amplitudes.tolist(),)


class Operator(object):
    """A dense square matrix acting on a finite dimensional space

    Hermiticity is a predicate, not an assumption.
    """
    # numpy scalars defer to __rmul__ instead of broadcasting over the object
    __array_ufunc__ = None

    def __init__(self, entries):
        entries = np.array(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] < 1:
            raise ValueError('An operator needs a non-empty square matrix, got shape %s' % (entries.shape,))

        entries.setflags(write=False)
        self._entries = entries

    @property
    def entries(self):
        return self._entries

    @property
    def dim(self):
        return self._entries.shape[0]

    @property
    def dagger(self):
        return Operator(self._entries.conj().T)

    def is_hermitian(self, atol=HERMITIAN_TOLERANCE):
        return bool(np.allclose(self._entries, self._entries.conj().T, rtol=0, atol=atol))

    def spectrum(self):
        return linalg.eigvals(self._entries)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self._entries @ other.entries)
        if isinstance(other, Ket):
            return Ket(self._entries @ other.amplitudes)

        return NotImplemented

    def __add__(self, other):
        return Operator(self._entries + other.entries)

    def __sub__(self, other):
        return Operator(self._entries - other.entries)

    def __mul__(self, scalar):
        return Operator(scalar * self._entries)

    __rmul__ = __mul__

    def __repr__(self):
        return 'Operator(%r)' % (self._entries.tolist(),)


def _entries(operator):
    if isinstance(operator, Operator):
        return operator.entries

    return Operator(operator).entries


class LindbladModel(object):
    """A Hamiltonian together with its Lindblad operators

    The stacked arrays used by the integrators are computed once here.
    """
    def __init__(self, hamiltonian, lindblads=()):
        self._hamiltonian = hamiltonian if isinstance(hamiltonian, Operator) else Operator(hamiltonian)
        self._lindblads = tuple(L if isinstance(L, Operator) else Operator(L) for L in lindblads)

        if not self._hamiltonian.is_hermitian():
            raise ValueError('The Hamiltonian is not Hermitian')

        for index, L in enumerate(self._lindblads):
            if L.dim != self.dim:
                raise ValueError('Lindblad operator %d has dimension %d, the Hamiltonian %d'
                                 % (index, L.dim, self.dim))

        stacked = np.array([L.entries for L in self._lindblads], dtype=complex).reshape(-1, self.dim, self.dim)
        stacked.setflags(write=False)
        self._stacked = stacked

        decay = np.einsum('cji,cjk->ik', stacked.conj(), stacked)
        decay.setflags(write=False)
        self._decay = decay

    @property
    def hamiltonian(self):
        return self._hamiltonian

    @property
    def lindblads(self):
        return self._lindblads

    @property
    def dim(self):
        return self._hamiltonian.dim

    @property
    def n_channels(self):
        return len(self._lindblads)

    @property
    def h(self):
        """The Hamiltonian as an ndarray"""
        return self._hamiltonian.entries

    @property
    def stacked_lindblads(self):
        """All Lindblad operators as one (channels, dim, dim) ndarray"""
        return self._stacked

    @property
    def decay(self):
        """sum_j L_j^dagger L_j"""
        return self._decay

    def __repr__(self):
        return 'LindbladModel(dim=%d, channels=%d)' % (self.dim, self.n_channels)


class DoubledState(object):
    """A vector theta = (phi, psi) of the doubled space H + H"""
    def __init__(self, upper, lower):
        upper = upper if isinstance(upper, Ket) else Ket(upper)
        lower = lower if isinstance(lower, Ket) else Ket(lower)
        if upper.dim != lower.dim:
            raise ValueError('Blocks of a doubled state differ in dimension: %d != %d' % (upper.dim, lower.dim))

        norm_sq = upper.norm ** 2 + lower.norm ** 2
        if not np.isfinite(norm_sq) or norm_sq <= 0:
            raise ValueError('A doubled state needs a finite positive norm, got %r' % norm_sq)

        self._upper = upper
        self._lower = lower

    @classmethod
    def from_vector(cls, vector):
        vector = np.asarray(vector, dtype=complex)
        if vector.ndim != 1 or vector.size % 2:
            raise ValueError('A doubled state vector needs an even length, got shape %s' % (vector.shape,))

        half = vector.size // 2
        return cls(Ket(vector[:half]), Ket(vector[half:]))

    @property
    def upper(self):
        """The phi block"""
        return self._upper

    @property
    def lower(self):
        """The psi block"""
        return self._lower

    @property
    def dim(self):
        return self._upper.dim

    @property
    @complex_array
    def vector(self):
        return np.concatenate([self._upper.amplitudes, self._lower.amplitudes])

    @property
    def norm(self):
        return float(np.linalg.norm(self.vector))

    def __repr__(self):
        return 'DoubledState(upper=%r, lower=%r)' % (self._upper, self._lower)


class DensityMatrix(object):
    """A density matrix, or one of the (generally non-Hermitian) blocks of a doubled one"""
    def __init__(self, entries, hermitian=True):
        entries = np.array(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError('A density matrix needs a square matrix, got shape %s' % (entries.shape,))

        entries.setflags(write=False)
        self._entries = entries
        self._hermitian = bool(hermitian)

    @property
    def entries(self):
        return self._entries

    @property
    def hermitian_flag(self):
        return self._hermitian

    @property
    def dim(self):
        return self._entries.shape[0]

    @property
    def trace(self):
        return complex(np.trace(self._entries))

    def block(self, i, j):
        """The (i, j) block of a doubled-space matrix, blocks counted from 1"""
        if self.dim % 2:
            raise ValueError('Only a doubled-space matrix has blocks')

        half = self.dim // 2
        rows = slice((i - 1) * half, i * half)
        cols = slice((j - 1) * half, j * half)
        return DensityMatrix(self._entries[rows, cols], hermitian=self._hermitian and i == j)

    def eigenvalues(self):
        if self._hermitian:
            return linalg.eigvalsh(0.5 * (self._entries + self._entries.conj().T))

        return linalg.eigvals(self._entries)

    def violations(self, hermitian_atol=1e-12, trace_atol=1e-10, positivity_atol=1e-10):
        """List the density-matrix invariants this matrix breaks (empty for a valid one)"""
        if not self._hermitian:
            return []

        problems = []
        if not np.allclose(self._entries, self._entries.conj().T, rtol=0, atol=hermitian_atol):
            problems.append('not Hermitian')
        if abs(self.trace - 1) > trace_atol:
            problems.append('trace %r' % self.trace)
        if self.eigenvalues().min() < -positivity_atol:
            problems.append('negative eigenvalue %r' % self.eigenvalues().min())

        return problems

    def __repr__(self):
        return 'DensityMatrix(%r, hermitian=%r)' % (self._entries.tolist(), self._hermitian)


def extend_model(model):
    """Lift a model to the doubled space with block-diagonal H and L_j"""
    return LindbladModel(hamiltonian=linalg.block_diag(model.h, model.h),
                         lindblads=[linalg.block_diag(L.entries, L.entries) for L in model.lindblads])


def restrict_model(model, block=0):
    """Take one diagonal block of a doubled model"""
    if model.dim % 2:
        raise ValueError('Model of dimension %d is not a doubled model' % model.dim)

    half = model.dim // 2
    window = slice(block * half, (block + 1) * half)
    return LindbladModel(hamiltonian=model.h[window, window],
                         lindblads=[L.entries[window, window] for L in model.lindblads])


def _checked_normalized(ket, name):
    ket = ket if isinstance(ket, Ket) else Ket(ket)
    norm = ket.norm
    if norm == 0:
        raise ValueError('%s has zero norm' % name)
    if abs(norm - 1) > 1e-9:
        raise ValueError('%s is not normalized (norm %r)' % (name, norm))

    return ket


def make_theta(phi0, psi0):
    """The doubled initial state theta_0 = (phi_0, psi_0) / sqrt(2)"""
    phi0 = _checked_normalized(phi0, 'phi0')
    psi0 = _checked_normalized(psi0, 'psi0')
    if phi0.dim != psi0.dim:
        raise ValueError('phi0 and psi0 differ in dimension: %d != %d' % (phi0.dim, psi0.dim))

    return DoubledState(Ket(phi0.amplitudes / np.sqrt(2)), Ket(psi0.amplitudes / np.sqrt(2)))


def projector(theta):
    """|theta><theta| on the doubled space"""
    vector = theta.vector
    return DensityMatrix(np.outer(vector, vector.conj()), hermitian=True)


def braket(bra, operator, ket):
    """<bra|A|ket> for kets or for stacked (..., dim) arrays"""
    bra = bra.vector if hasattr(bra, 'vector') else np.asarray(bra)
    ket = ket.vector if hasattr(ket, 'vector') else np.asarray(ket)
    return np.einsum('...i,ij,...j->...', bra.conj(), _entries(operator), ket)


def two_level_builders(omega=10.0):
    """sigma^-, sigma^+ and the resonant driving Hamiltonian (omega/2)(sigma^+ + sigma^-)"""
    sigma_minus = Operator([[0, 1], [0, 0]])
    sigma_plus = sigma_minus.dagger
    drive = (omega / 2.0) * (sigma_plus + sigma_minus)

    return sigma_minus, sigma_plus, drive


def decay_model(gamma=1.0):
    """Spontaneous emission of an undriven two-level atom"""
    sigma_minus, _, _ = two_level_builders()
    return LindbladModel(hamiltonian=np.zeros((2, 2)), lindblads=[np.sqrt(gamma) * sigma_minus])


def fluorescence_model(omega=10.0, gamma=1.0):
    """The two-level atom driven on resonance with Rabi frequency omega"""
    sigma_minus, _, drive = two_level_builders(omega=omega)
    return LindbladModel(hamiltonian=drive, lindblads=[np.sqrt(gamma) * sigma_minus])


def random_ket(dim, rng):
    """A Haar-uniform ket: independent complex Gaussian amplitudes, normalized"""
    gaussian = rng.standard_normal((dim, 2))
    return Ket.normalize(gaussian[:, 0] + 1j * gaussian[:, 1])


def random_model(dim, n_channels, rng, scale=1.0):
    """A random Hermitian Hamiltonian with random Lindblad operators"""
    def gaussian_matrix():
        parts = rng.standard_normal((2, dim, dim))
        return (parts[0] + 1j * parts[1]) / np.sqrt(2 * dim)

    x = gaussian_matrix()
    hamiltonian = scale * 0.5 * (x + x.conj().T)
    lindblads = [np.sqrt(scale) * gaussian_matrix() for _ in range(n_channels)]

    return LindbladModel(hamiltonian=hamiltonian, lindblads=lindblads)


def decay_element_kets():
    """phi0 = |e> and psi0 = (|g> + |e>)/sqrt(2), the initial pair of the decay matrix element

    Written in this module's (ground, excited) ordering, where |e> = (0, 1).
    """
    return Ket([0, 1], normalized=True), Ket.normalize([1, 1])
