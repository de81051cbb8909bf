"""Tree forcings: Sacks trees and fusion, sunflowers, Halpern-Lauchli, Namba."""
