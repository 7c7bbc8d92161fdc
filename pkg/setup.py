import setuptools

long_description = """
LaminateColloc solves the 3D elasticity problem of laminated composite plates with isogeometric collocation on a single homogenized element.

1. Spline kernel: open knot vectors, B-spline/NURBS basis functions and their derivatives up to third order, Greville abscissae.
2. Laminate material: orthotropic ply stiffness, cross-ply layups and the effective stiffness of a symmetric stack.
3. Collocation solver: strong-form Navier equations at interior Greville points, traction and simple-support conditions on the faces, dense LU solve.
4. Stress recovery: out-of-plane stresses obtained by integrating the equilibrium equations through the thickness.
5. Reference solution: exact layerwise solution of the simply supported cross-ply plate under a sinusoidal load, used to measure the error.

The `laminate-colloc` command runs single cases, sweeps, profile exports and the reference checks.
"""

setuptools.setup(
    name="LaminateColloc",
    version="0.1.0",
    description="Isogeometric collocation of laminated composite plates with stress recovery",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(),
    install_requires=["numpy>=1.20", "scipy>=1.6"],
    extras_require={"test": ["hypothesis>=6"]},
    entry_points={"console_scripts": ["laminate-colloc = laminate_colloc.cli:main"]},
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering",
    ],
    python_requires=">=3.8",
)
