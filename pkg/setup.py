"""Build script: compiles the hot kernels when a C toolchain is available.

``ssrank._kernels`` is written in Cython pure-Python mode, so the package
works unchanged (just slower) if compilation fails; the import machinery
picks the extension over the source file automatically when it exists.
"""

from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/ssrank/_kernels.py"],
        # cpow: real-valued ** (plain C pow); bases here are nonnegative,
        # and the complex-capable default is a ulp off libm pow
        compiler_directives={"language_level": "3", "cdivision": False,
                             "cpow": True},
    )
except Exception as exc:  # pragma: no cover - toolchain-dependent
    print(f"ssrank: building without compiled kernels ({exc})")
    ext_modules = []

setup(ext_modules=ext_modules)
